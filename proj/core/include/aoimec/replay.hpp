#pragma once

#include <cstdint>
#include <vector>

#include "aoimec/rng.hpp"

namespace aoimec {

struct Transition {
    std::vector<double> state;
    std::vector<int> action;  // one index per branch
    double reward = 0.0;
    std::vector<double> next_state;
    bool done = false;  // terminal: no bootstrapping past this slot
};

// Fixed-capacity ring with uniform sampling (with replacement).
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return size_; }
    std::size_t capacity() const { return buf_.size(); }
    bool ready(std::size_t batch) const { return size_ >= batch; }

    std::vector<const Transition*> sample(std::size_t batch, Rng& rng) const;

private:
    std::vector<Transition> buf_;
    std::size_t head_ = 0;
    std::size_t size_ = 0;
};

}  // namespace aoimec
