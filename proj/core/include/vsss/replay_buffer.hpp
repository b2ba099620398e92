#pragma once

#include <cstddef>
#include <vector>

#include "vsss/rng.hpp"

namespace vsss {

struct Transition {
  std::vector<double> obs;
  std::vector<double> action;  // one-hot for discrete policies, normalized (v, omega) otherwise
  double reward = 0.0;
  std::vector<double> next_obs;
  bool done = false;
};

// Fixed-capacity FIFO ring of transitions with uniform with-replacement sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

  // logical index 0 = oldest element still stored
  const Transition& at(std::size_t logical) const;

  // Uniform over the current contents, seed-deterministic. Requires
  // size() >= batch_size.
  std::vector<const Transition*> sample(std::size_t batch_size, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> storage_;
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;  // next write slot; == oldest once full
};

}  // namespace vsss
