#include "vsss/replay_buffer.hpp"

#include "vsss/error.hpp"

namespace vsss {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ContractError("ReplayBuffer capacity must be > 0");
  storage_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
  if (size_ < capacity_) {
    storage_.push_back(std::move(t));
    ++size_;
  } else {
    storage_[cursor_] = std::move(t);  // evicts the oldest element
  }
  cursor_ = (cursor_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t logical) const {
  if (logical >= size_) throw ContractError("ReplayBuffer::at out of range");
  if (size_ < capacity_) return storage_[logical];
  return storage_[(cursor_ + logical) % capacity_];
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  if (batch_size == 0) throw ContractError("ReplayBuffer::sample: empty batch");
  if (size_ < batch_size) {
    throw ContractError("ReplayBuffer::sample: buffer holds " + std::to_string(size_) +
                        " < batch " + std::to_string(batch_size));
  }
  std::vector<const Transition*> out;
  out.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    out.push_back(&storage_[rng.uniform_index(size_)]);
  }
  return out;
}

}  // namespace vsss
