#include "aoimec/replay.hpp"

#include <stdexcept>

namespace aoimec {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : buf_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay: capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
    buf_[head_] = std::move(t);
    head_ = (head_ + 1) % buf_.size();
    if (size_ < buf_.size()) ++size_;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
    if (size_ < batch) throw std::logic_error("replay: fewer transitions than the batch size");
    std::vector<const Transition*> out(batch);
    for (std::size_t k = 0; k < batch; ++k) out[k] = &buf_[rng.below(size_)];
    return out;
}

}  // namespace aoimec
