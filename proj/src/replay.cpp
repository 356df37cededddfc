#include "dqlpa/replay.hpp"

#include "dqlpa/qnet.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

namespace dqlpa {

namespace {

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
        throw CheckpointError("replay snapshot truncated");
    return v;
}

template <typename T>
void put_vec(std::ostream& out, const std::vector<T>& v) {
    put(out, static_cast<std::uint64_t>(v.size()));
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
std::vector<T> get_vec(std::istream& in) {
    const auto n = get<std::uint64_t>(in);
    if (n > (1ULL << 32)) throw CheckpointError("corrupt replay snapshot");
    std::vector<T> v(static_cast<std::size_t>(n));
    if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T))))
        throw CheckpointError("replay snapshot truncated");
    return v;
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("replay capacity must be positive");
    storage_.reserve(std::min<std::size_t>(capacity_, 1u << 16));
}

void ReplayBuffer::push(Transition t) {
    if (storage_.size() < capacity_) {
        storage_.push_back(std::move(t));
        return;
    }
    storage_[cursor_] = std::move(t);
    cursor_ = (cursor_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
    if (i >= storage_.size()) throw std::out_of_range("replay index out of range");
    return storage_[(cursor_ + i) % storage_.size()];
}

std::optional<std::vector<std::reference_wrapper<const Transition>>> ReplayBuffer::sample(
    std::size_t batch_size, Rng& rng) const {
    if (!ready(batch_size)) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, storage_.size() - 1);
    std::vector<std::reference_wrapper<const Transition>> out;
    out.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) out.emplace_back(storage_[pick(rng)]);
    return out;
}

void ReplayBuffer::write(std::ostream& out) const {
    put(out, static_cast<std::uint64_t>(capacity_));
    put(out, static_cast<std::uint64_t>(cursor_));
    put(out, static_cast<std::uint64_t>(storage_.size()));
    for (const auto& t : storage_) {
        put_vec(out, t.state.values);
        put_vec(out, t.joint_action);
        put(out, t.reward);
        put_vec(out, t.next_state.values);
        put(out, static_cast<std::uint8_t>(t.terminal));
    }
}

ReplayBuffer ReplayBuffer::read(std::istream& in) {
    ReplayBuffer buf(static_cast<std::size_t>(get<std::uint64_t>(in)));
    buf.cursor_ = static_cast<std::size_t>(get<std::uint64_t>(in));
    const auto n = static_cast<std::size_t>(get<std::uint64_t>(in));
    if (n > buf.capacity_ || buf.cursor_ >= buf.capacity_)
        throw CheckpointError("corrupt replay snapshot header");
    for (std::size_t i = 0; i < n; ++i) {
        Transition t;
        t.state.values = get_vec<double>(in);
        t.joint_action = get_vec<int>(in);
        t.reward = get<double>(in);
        t.next_state.values = get_vec<double>(in);
        t.terminal = get<std::uint8_t>(in) != 0;
        buf.storage_.push_back(std::move(t));
    }
    return buf;
}

}  // namespace dqlpa
