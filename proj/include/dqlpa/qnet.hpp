#pragma once

#include "dqlpa/rng.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace dqlpa {

class TrainingFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Weights of a one-hidden-layer network. Also used for gradients and optimizer
/// accumulators, which share the same shapes.
struct Parameters {
    Eigen::MatrixXd hidden_weights;  // hidden x input
    Eigen::VectorXd hidden_bias;
    Eigen::MatrixXd output_weights;  // output x hidden
    Eigen::VectorXd output_bias;

    static Parameters zeros(int input, int hidden, int output);

    template <typename Fn>
    void for_each(Fn&& fn) {
        fn(hidden_weights.data(), hidden_weights.size());
        fn(hidden_bias.data(), hidden_bias.size());
        fn(output_weights.data(), output_weights.size());
        fn(output_bias.data(), output_bias.size());
    }
    template <typename Fn>
    void for_each(Fn&& fn) const {
        fn(hidden_weights.data(), hidden_weights.size());
        fn(hidden_bias.data(), hidden_bias.size());
        fn(output_weights.data(), output_weights.size());
        fn(output_bias.data(), output_bias.size());
    }
    bool operator==(const Parameters& o) const;
};

/// Minibatch for the masked squared loss: each sample picks one output unit per
/// block of `actions_per_cell` outputs and regresses it onto its target.
struct TrainBatch {
    Eigen::MatrixXd states;     // input x n
    std::vector<int> actions;   // n x cells, index within the cell's block
    std::vector<double> targets;  // n x cells
    int cells = 1;
    int actions_per_cell = 1;

    int size() const { return static_cast<int>(states.cols()); }
};

/// Input -> ReLU hidden -> linear output.
class Mlp {
public:
    Mlp(int input, int hidden, int output);

    /// He-normal weights (std = sqrt(2 / fan_in)), zero biases.
    static Mlp he_normal(std::array<int, 3> sizes, Rng& rng);

    int input_size() const { return static_cast<int>(params_.hidden_weights.cols()); }
    int hidden_size() const { return static_cast<int>(params_.hidden_weights.rows()); }
    int output_size() const { return static_cast<int>(params_.output_weights.rows()); }
    std::array<int, 3> layer_sizes() const { return {input_size(), hidden_size(), output_size()}; }

    Parameters& params() { return params_; }
    const Parameters& params() const { return params_; }

    Eigen::VectorXd forward(std::span<const double> state) const;
    /// Column-wise forward of an input x n matrix.
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& states) const;

    double loss(const TrainBatch& batch) const;
    /// Loss and its gradient with respect to every parameter.
    double gradients(const TrainBatch& batch, Parameters& grad) const;

    Mlp clone() const { return *this; }
    std::uint64_t hash() const;

private:
    void check_input(Eigen::Index rows) const;
    void check_batch(const TrainBatch& batch) const;

    Parameters params_;
};

struct RmsPropConfig {
    double learning_rate = 0.00025;
    double decay = 0.95;
    double epsilon = 1e-6;
};

/// acc <- decay * acc + (1 - decay) * g^2;  theta <- theta - lr * g / (sqrt(acc) + eps)
class RmsProp {
public:
    RmsProp(const Mlp& net, RmsPropConfig cfg);

    const RmsPropConfig& config() const { return cfg_; }
    const Parameters& accumulators() const { return acc_; }
    Parameters& accumulators() { return acc_; }

    void step(Parameters& params, const Parameters& grad);

private:
    RmsPropConfig cfg_;
    Parameters acc_;
};

/// One optimizer step on the batch; returns the loss before the update.
/// Throws TrainingFault if the loss is not finite.
double train_batch(Mlp& net, RmsProp& opt, const TrainBatch& batch);

// Checkpoint layout (little-endian):
//   8 bytes  magic "DQLPAQN1"
//   u32      format version (1)
//   3 x u64  input, hidden, output sizes
//   f64[]    hidden_weights (row-major), hidden_bias, output_weights (row-major), output_bias
//   3 x f64  learning_rate, decay, epsilon
//   f64[]    optimizer accumulators in the same order and layout as the parameters
void write_checkpoint(std::ostream& out, const Mlp& net, const RmsProp& opt);
void save_checkpoint(const std::filesystem::path& path, const Mlp& net, const RmsProp& opt);

struct Checkpoint {
    Mlp net;
    RmsProp optimizer;
};

Checkpoint read_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);
/// Rejects checkpoints whose layer sizes differ from `expected`.
Checkpoint load_checkpoint(const std::filesystem::path& path, std::array<int, 3> expected);

}  // namespace dqlpa
