#include "dqlpa/qnet.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace dqlpa {

namespace {

constexpr char kMagic[8] = {'D', 'Q', 'L', 'P', 'A', 'Q', 'N', '1'};
constexpr std::uint32_t kVersion = 1;

std::string sizes_str(std::array<int, 3> s) {
    return "{" + std::to_string(s[0]) + ", " + std::to_string(s[1]) + ", " +
           std::to_string(s[2]) + "}";
}

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
        throw CheckpointError("checkpoint truncated");
    return v;
}

void put_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) put(out, m(r, c));
}

void get_matrix(std::istream& in, Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = get<double>(in);
}

void put_vector(std::ostream& out, const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) put(out, v(i));
}

void get_vector(std::istream& in, Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = get<double>(in);
}

void put_params(std::ostream& out, const Parameters& p) {
    put_matrix(out, p.hidden_weights);
    put_vector(out, p.hidden_bias);
    put_matrix(out, p.output_weights);
    put_vector(out, p.output_bias);
}

void get_params(std::istream& in, Parameters& p) {
    get_matrix(in, p.hidden_weights);
    get_vector(in, p.hidden_bias);
    get_matrix(in, p.output_weights);
    get_vector(in, p.output_bias);
}

}  // namespace

Parameters Parameters::zeros(int input, int hidden, int output) {
    return {Eigen::MatrixXd::Zero(hidden, input), Eigen::VectorXd::Zero(hidden),
            Eigen::MatrixXd::Zero(output, hidden), Eigen::VectorXd::Zero(output)};
}

bool Parameters::operator==(const Parameters& o) const {
    return hidden_weights == o.hidden_weights && hidden_bias == o.hidden_bias &&
           output_weights == o.output_weights && output_bias == o.output_bias;
}

Mlp::Mlp(int input, int hidden, int output) {
    if (input < 1 || hidden < 1 || output < 1)
        throw std::invalid_argument("layer sizes must be positive");
    params_ = Parameters::zeros(input, hidden, output);
}

Mlp Mlp::he_normal(std::array<int, 3> sizes, Rng& rng) {
    Mlp net(sizes[0], sizes[1], sizes[2]);
    std::normal_distribution<double> w1(0.0, std::sqrt(2.0 / sizes[0]));
    std::normal_distribution<double> w2(0.0, std::sqrt(2.0 / sizes[1]));
    auto& p = net.params_;
    for (Eigen::Index r = 0; r < p.hidden_weights.rows(); ++r)
        for (Eigen::Index c = 0; c < p.hidden_weights.cols(); ++c) p.hidden_weights(r, c) = w1(rng);
    for (Eigen::Index r = 0; r < p.output_weights.rows(); ++r)
        for (Eigen::Index c = 0; c < p.output_weights.cols(); ++c) p.output_weights(r, c) = w2(rng);
    return net;
}

void Mlp::check_input(Eigen::Index rows) const {
    if (rows != input_size())
        throw std::invalid_argument("input has " + std::to_string(rows) +
                                    " entries, network expects " +
                                    std::to_string(input_size()));
}

Eigen::VectorXd Mlp::forward(std::span<const double> state) const {
    check_input(static_cast<Eigen::Index>(state.size()));
    const Eigen::Map<const Eigen::VectorXd> s(state.data(), static_cast<Eigen::Index>(state.size()));
    const Eigen::VectorXd h = (params_.hidden_weights * s + params_.hidden_bias).cwiseMax(0.0);
    return params_.output_weights * h + params_.output_bias;
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& states) const {
    check_input(states.rows());
    const Eigen::MatrixXd h =
        ((params_.hidden_weights * states).colwise() + params_.hidden_bias).cwiseMax(0.0);
    return (params_.output_weights * h).colwise() + params_.output_bias;
}

void Mlp::check_batch(const TrainBatch& batch) const {
    check_input(batch.states.rows());
    const auto n = static_cast<std::size_t>(batch.size());
    const auto k = static_cast<std::size_t>(batch.cells);
    if (n == 0) throw std::invalid_argument("empty training batch");
    if (batch.actions.size() != n * k || batch.targets.size() != n * k)
        throw std::invalid_argument("batch actions/targets must hold size * cells entries");
    if (batch.cells * batch.actions_per_cell != output_size())
        throw std::invalid_argument("cells * actions_per_cell must equal the output size");
    for (int a : batch.actions)
        if (a < 0 || a >= batch.actions_per_cell)
            throw std::invalid_argument("action index out of range in batch");
}

double Mlp::loss(const TrainBatch& batch) const {
    check_batch(batch);
    const Eigen::MatrixXd q = forward_batch(batch.states);
    double sum = 0;
    std::size_t i = 0;
    for (int j = 0; j < batch.size(); ++j) {
        for (int k = 0; k < batch.cells; ++k, ++i) {
            const double d =
                q(k * batch.actions_per_cell + batch.actions[i], j) - batch.targets[i];
            sum += d * d;
        }
    }
    return sum / static_cast<double>(batch.actions.size());
}

double Mlp::gradients(const TrainBatch& batch, Parameters& grad) const {
    check_batch(batch);
    const auto& p = params_;
    const Eigen::MatrixXd z = (p.hidden_weights * batch.states).colwise() + p.hidden_bias;
    const Eigen::MatrixXd h = z.cwiseMax(0.0);
    const Eigen::MatrixXd q = (p.output_weights * h).colwise() + p.output_bias;

    const double scale = 1.0 / static_cast<double>(batch.actions.size());
    Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(q.rows(), q.cols());
    double sum = 0;
    std::size_t i = 0;
    for (int j = 0; j < batch.size(); ++j) {
        for (int k = 0; k < batch.cells; ++k, ++i) {
            const int o = k * batch.actions_per_cell + batch.actions[i];
            const double d = q(o, j) - batch.targets[i];
            sum += d * d;
            dq(o, j) += 2.0 * d * scale;
        }
    }

    grad.output_weights = dq * h.transpose();
    grad.output_bias = dq.rowwise().sum();
    const Eigen::MatrixXd dz =
        (p.output_weights.transpose() * dq).cwiseProduct((z.array() > 0.0).cast<double>().matrix());
    grad.hidden_weights = dz * batch.states.transpose();
    grad.hidden_bias = dz.rowwise().sum();
    return sum * scale;
}

std::uint64_t Mlp::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    params_.for_each([&h](const double* data, Eigen::Index n) {
        h = fnv1a(data, static_cast<std::size_t>(n) * sizeof(double), h);
    });
    return h;
}

RmsProp::RmsProp(const Mlp& net, RmsPropConfig cfg)
    : cfg_(cfg), acc_(Parameters::zeros(net.input_size(), net.hidden_size(), net.output_size())) {}

void RmsProp::step(Parameters& params, const Parameters& grad) {
    const double lr = cfg_.learning_rate;
    const double rho = cfg_.decay;
    const double eps = cfg_.epsilon;
    auto update = [&](auto& theta, auto& acc, const auto& g) {
        acc.array() = rho * acc.array() + (1.0 - rho) * g.array().square();
        theta.array() -= lr * g.array() / (acc.array().sqrt() + eps);
    };
    update(params.hidden_weights, acc_.hidden_weights, grad.hidden_weights);
    update(params.hidden_bias, acc_.hidden_bias, grad.hidden_bias);
    update(params.output_weights, acc_.output_weights, grad.output_weights);
    update(params.output_bias, acc_.output_bias, grad.output_bias);
}

double train_batch(Mlp& net, RmsProp& opt, const TrainBatch& batch) {
    Parameters grad;
    const double loss = net.gradients(batch, grad);
    if (!std::isfinite(loss)) throw TrainingFault("non-finite training loss");
    opt.step(net.params(), grad);
    return loss;
}

void write_checkpoint(std::ostream& out, const Mlp& net, const RmsProp& opt) {
    out.write(kMagic, sizeof kMagic);
    put(out, kVersion);
    for (int s : net.layer_sizes()) put(out, static_cast<std::uint64_t>(s));
    put_params(out, net.params());
    put(out, opt.config().learning_rate);
    put(out, opt.config().decay);
    put(out, opt.config().epsilon);
    put_params(out, opt.accumulators());
    if (!out) throw CheckpointError("failed writing checkpoint");
}

void save_checkpoint(const std::filesystem::path& path, const Mlp& net, const RmsProp& opt) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
    write_checkpoint(out, net, opt);
}

Checkpoint read_checkpoint(std::istream& in) {
    char magic[sizeof kMagic];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw CheckpointError("not a Q-network checkpoint (bad magic)");
    if (const auto v = get<std::uint32_t>(in); v != kVersion)
        throw CheckpointError("unsupported checkpoint version " + std::to_string(v));
    std::array<int, 3> sizes{};
    for (int& s : sizes) {
        const auto v = get<std::uint64_t>(in);
        if (v == 0 || v > (1u << 24)) throw CheckpointError("corrupt layer size in header");
        s = static_cast<int>(v);
    }
    Checkpoint cp{Mlp(sizes[0], sizes[1], sizes[2]), RmsProp(Mlp(1, 1, 1), {})};
    get_params(in, cp.net.params());
    RmsPropConfig cfg;
    cfg.learning_rate = get<double>(in);
    cfg.decay = get<double>(in);
    cfg.epsilon = get<double>(in);
    cp.optimizer = RmsProp(cp.net, cfg);
    get_params(in, cp.optimizer.accumulators());
    return cp;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
    return read_checkpoint(in);
}

Checkpoint load_checkpoint(const std::filesystem::path& path, std::array<int, 3> expected) {
    Checkpoint cp = load_checkpoint(path);
    if (cp.net.layer_sizes() != expected)
        throw CheckpointError("checkpoint layer sizes " + sizes_str(cp.net.layer_sizes()) +
                              " do not match expected " + sizes_str(expected));
    return cp;
}

}  // namespace dqlpa
