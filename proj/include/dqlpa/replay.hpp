#pragma once

#include "dqlpa/env.hpp"
#include "dqlpa/rng.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace dqlpa {

/// Fixed-capacity FIFO of transitions with uniform sampling (with replacement).
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return storage_.size(); }
    bool ready(std::size_t batch_size) const { return size() >= batch_size && batch_size > 0; }

    void push(Transition t);

    /// i = 0 is the oldest stored transition.
    const Transition& at(std::size_t i) const;

    /// nullopt until the buffer holds at least batch_size transitions.
    std::optional<std::vector<std::reference_wrapper<const Transition>>> sample(
        std::size_t batch_size, Rng& rng) const;

    void write(std::ostream& out) const;
    static ReplayBuffer read(std::istream& in);

private:
    std::size_t capacity_;
    std::vector<Transition> storage_;
    std::size_t cursor_ = 0;  // next slot to overwrite once full
};

}  // namespace dqlpa
