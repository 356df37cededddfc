#include "dqlpa/agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <future>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace dqlpa {

namespace {

constexpr char kTrainerMagic[8] = {'D', 'Q', 'L', 'P', 'A', 'T', 'R', '1'};

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
        throw CheckpointError("trainer snapshot truncated");
    return v;
}

int block_argmax(std::span<const double> q, int block, int m) {
    const auto first = q.begin() + static_cast<std::ptrdiff_t>(block) * m;
    return static_cast<int>(std::max_element(first, first + m) - first);
}

RmsPropConfig rmsprop_config(const AgentConfig& cfg) {
    return {cfg.learning_rate, cfg.rmsprop_decay, cfg.rmsprop_epsilon};
}

Mlp initial_network(const Environment& env, const AgentConfig& cfg, std::uint64_t seed) {
    Rng rng = make_rng(seed, Stream::network_init);
    return Mlp::he_normal(network_sizes(env, cfg), rng);
}

}  // namespace

JointAction select_joint_action(std::span<const double> q_values, int num_cells, double epsilon,
                                Rng& rng) {
    if (num_cells < 1 || q_values.size() % static_cast<std::size_t>(num_cells) != 0)
        throw UsageError("q-value length is not a multiple of the cell count");
    const int m = static_cast<int>(q_values.size()) / num_cells;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> any(0, m - 1);
    JointAction a(static_cast<std::size_t>(num_cells));
    for (int k = 0; k < num_cells; ++k) {
        const bool explore = epsilon > 0 && unit(rng) < epsilon;
        a[static_cast<std::size_t>(k)] = explore ? any(rng) : block_argmax(q_values, k, m);
    }
    return a;
}

std::vector<double> bellman_targets(const Mlp& target,
                                    std::span<const std::reference_wrapper<const Transition>> batch,
                                    double discount, int num_cells, int actions_per_cell) {
    const auto n = static_cast<Eigen::Index>(batch.size());
    Eigen::MatrixXd next(target.input_size(), n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& s = batch[static_cast<std::size_t>(j)].get().next_state.values;
        next.col(j) = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
    }
    const Eigen::MatrixXd q = target.forward_batch(next);
    std::vector<double> y;
    y.reserve(batch.size() * static_cast<std::size_t>(num_cells));
    for (Eigen::Index j = 0; j < n; ++j) {
        const Transition& t = batch[static_cast<std::size_t>(j)];
        for (int k = 0; k < num_cells; ++k) {
            if (t.terminal) {
                y.push_back(t.reward);
            } else {
                const double best = q.col(j).segment(k * actions_per_cell, actions_per_cell).maxCoeff();
                y.push_back(t.reward + discount * best);
            }
        }
    }
    return y;
}

TrainBatch make_train_batch(std::span<const std::reference_wrapper<const Transition>> batch,
                            std::vector<double> targets, int num_cells, int actions_per_cell) {
    TrainBatch tb;
    tb.cells = num_cells;
    tb.actions_per_cell = actions_per_cell;
    const auto n = static_cast<Eigen::Index>(batch.size());
    const auto input = static_cast<Eigen::Index>(batch.front().get().state.size());
    tb.states.resize(input, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Transition& t = batch[static_cast<std::size_t>(j)];
        tb.states.col(j) = Eigen::Map<const Eigen::VectorXd>(t.state.values.data(), input);
        tb.actions.insert(tb.actions.end(), t.joint_action.begin(), t.joint_action.end());
    }
    tb.targets = std::move(targets);
    return tb;
}

std::array<int, 3> network_sizes(const Environment& env, const AgentConfig& cfg) {
    const int out = env.output_size();
    return {env.state_size(), cfg.hidden_units > 0 ? cfg.hidden_units : 2 * out, out};
}

Trainer::Trainer(const Environment& env, AgentConfig cfg, std::uint64_t seed)
    : Trainer(env, cfg, initial_network(env, cfg, seed),
              RmsProp(Mlp(1, 1, 1), rmsprop_config(cfg)), seed) {
    opt_ = RmsProp(online_, rmsprop_config(cfg_));
}

Trainer::Trainer(const Environment& env, AgentConfig cfg, Mlp initial, RmsProp optimizer,
                 std::uint64_t seed)
    : env_(&env),
      cfg_((cfg.validate(), cfg)),
      online_(std::move(initial)),
      opt_(std::move(optimizer)),
      target_(online_.clone()),
      buffer_(static_cast<std::size_t>(cfg_.replay_capacity)),
      rng_(make_rng(seed, Stream::training)) {
    if (online_.layer_sizes()[0] != env.state_size() ||
        online_.layer_sizes()[2] != env.output_size())
        throw UsageError("network sizes do not match the environment");
}

void Trainer::step() {
    if (!episode_) {
        auto [ctx, s] = env_->reset(rng_);
        episode_.emplace(Episode{std::move(ctx), std::move(s)});
        episode_loss_sum_ = 0;
        episode_loss_count_ = 0;
    }
    const double eps = cfg_.epsilon_at(env_steps_);
    const Eigen::VectorXd q = online_.forward(episode_->state.values);
    JointAction a = select_joint_action(std::span(q.data(), static_cast<std::size_t>(q.size())),
                                        env_->num_cells(), eps, rng_);
    StepResult r = env_->step(episode_->ctx, a);
    buffer_.push({episode_->state, std::move(a), r.reward, r.next_state, r.terminal});
    episode_->state = std::move(r.next_state);
    ++env_steps_;

    const auto gate = std::min<long>(cfg_.training_gate(), cfg_.replay_capacity);
    if (static_cast<long>(buffer_.size()) >= gate && env_steps_ % cfg_.train_frequency == 0)
        gradient_step();

    if (r.terminal) {
        TrainLogRow row;
        row.step = env_steps_;
        row.episode = episodes_;
        row.epsilon = eps;
        row.loss = episode_loss_count_ > 0 ? episode_loss_sum_ / episode_loss_count_
                                           : std::numeric_limits<double>::quiet_NaN();
        row.episode_throughput = r.throughput;
        row.episode_length = episode_->ctx.step_count;
        log_.push_back(row);
        ++episodes_;
        episode_.reset();
    }
}

void Trainer::gradient_step() {
    const int K = env_->num_cells();
    const int m = env_->actions().size();
    auto batch = buffer_.sample(static_cast<std::size_t>(cfg_.batch_size), rng_);
    if (!batch) return;
    auto y = bellman_targets(target_, *batch, cfg_.discount, K, m);
    const TrainBatch tb = make_train_batch(*batch, std::move(y), K, m);
    try {
        last_loss_ = train_batch(online_, opt_, tb);
    } catch (const TrainingFault& e) {
        throw TrainingFault(std::string(e.what()) + " at environment step " +
                            std::to_string(env_steps_) + ", gradient step " +
                            std::to_string(grad_steps_ + 1) + ", episode " +
                            std::to_string(episodes_));
    }
    episode_loss_sum_ += last_loss_;
    ++episode_loss_count_;
    ++grad_steps_;
    if (grad_steps_ % cfg_.target_update_steps == 0) target_ = online_.clone();
}

void Trainer::run() {
    while (env_steps_ < cfg_.train_steps) step();
}

void Trainer::save(std::ostream& out) const {
    if (episode_) throw UsageError("trainer snapshots are only taken between episodes");
    out.write(kTrainerMagic, sizeof kTrainerMagic);
    write_checkpoint(out, online_, opt_);
    write_checkpoint(out, target_, RmsProp(target_, {}));
    put(out, static_cast<std::int64_t>(env_steps_));
    put(out, static_cast<std::int64_t>(grad_steps_));
    put(out, static_cast<std::int64_t>(episodes_));
    put(out, last_loss_);
    std::ostringstream rng_text;
    rng_text << rng_;
    const std::string rs = rng_text.str();
    put(out, static_cast<std::uint64_t>(rs.size()));
    out.write(rs.data(), static_cast<std::streamsize>(rs.size()));
    buffer_.write(out);
    put(out, static_cast<std::uint64_t>(log_.size()));
    for (const auto& row : log_) {
        put(out, static_cast<std::int64_t>(row.step));
        put(out, static_cast<std::int64_t>(row.episode));
        put(out, row.epsilon);
        put(out, row.loss);
        put(out, row.episode_throughput);
        put(out, static_cast<std::int32_t>(row.episode_length));
    }
    if (!out) throw CheckpointError("failed writing trainer snapshot");
}

Trainer Trainer::load(const Environment& env, AgentConfig cfg, std::istream& in) {
    char magic[sizeof kTrainerMagic];
    if (!in.read(magic, sizeof magic) ||
        std::memcmp(magic, kTrainerMagic, sizeof kTrainerMagic) != 0)
        throw CheckpointError("not a trainer snapshot (bad magic)");
    Checkpoint online = read_checkpoint(in);
    Checkpoint target = read_checkpoint(in);
    if (online.net.layer_sizes() != network_sizes(env, cfg) ||
        target.net.layer_sizes() != online.net.layer_sizes())
        throw CheckpointError("trainer snapshot does not match the environment's network sizes");
    Trainer t(env, cfg, std::move(online.net), std::move(online.optimizer), 0);
    t.target_ = std::move(target.net);
    t.env_steps_ = get<std::int64_t>(in);
    t.grad_steps_ = get<std::int64_t>(in);
    t.episodes_ = get<std::int64_t>(in);
    t.last_loss_ = get<double>(in);
    const auto len = get<std::uint64_t>(in);
    if (len > (1u << 20)) throw CheckpointError("corrupt RNG state length");
    std::string rs(static_cast<std::size_t>(len), '\0');
    if (!in.read(rs.data(), static_cast<std::streamsize>(len)))
        throw CheckpointError("trainer snapshot truncated");
    std::istringstream rng_text(rs);
    rng_text >> t.rng_;
    if (!rng_text) throw CheckpointError("corrupt RNG state");
    t.buffer_ = ReplayBuffer::read(in);
    const auto rows = get<std::uint64_t>(in);
    for (std::uint64_t i = 0; i < rows; ++i) {
        TrainLogRow row;
        row.step = get<std::int64_t>(in);
        row.episode = get<std::int64_t>(in);
        row.epsilon = get<double>(in);
        row.loss = get<double>(in);
        row.episode_throughput = get<double>(in);
        row.episode_length = get<std::int32_t>(in);
        t.log_.push_back(row);
    }
    return t;
}

TrainResult train(const Environment& env, const AgentConfig& cfg, std::uint64_t seed) {
    Trainer t(env, cfg, seed);
    t.run();
    return {t.online(), t.optimizer(), t.log(), t.gradient_steps()};
}

GreedyOutcome greedy_episode(const Environment& env, const Mlp& net, EpisodeContext ctx,
                             StateVector state) {
    GreedyOutcome out{ctx.initial_action, ctx.initial_throughput, 0};
    Rng unused(0);
    while (true) {
        const Eigen::VectorXd q = net.forward(state.values);
        JointAction a = select_joint_action(
            std::span(q.data(), static_cast<std::size_t>(q.size())), env.num_cells(), 0.0, unused);
        StepResult r = env.step(ctx, a);
        out.length = ctx.step_count;
        if (r.terminal) break;
        out.action = std::move(a);
        out.throughput = r.throughput;
        state = std::move(r.next_state);
    }
    return out;
}

TestRecord test_sample(const Environment& env, const Mlp& net, const TestOptions& opts,
                       int sample) {
    const auto idx = static_cast<std::uint64_t>(sample);
    const ScenarioConfig& cfg = env.scenario();
    TestRecord rec;
    rec.sample = sample;
    rec.channel_seed = derive_seed(opts.seed, static_cast<std::uint64_t>(Stream::test_channel), idx);

    Rng channel_rng(rec.channel_seed);
    Topology topo = build_topology(cfg, channel_rng);
    ChannelRealization ch = draw_channel(topo, cfg, channel_rng);

    Rng policy_rng = make_rng(opts.seed, Stream::test_policy, idx);
    auto [ctx, state] = env.reset_on(topo, ch, policy_rng);
    const GreedyOutcome dql = greedy_episode(env, net, std::move(ctx), std::move(state));
    rec.dql_throughput = dql.throughput;
    rec.dql_action = dql.action;
    rec.dql_episode_length = dql.length;

    Rng ga_rng = make_rng(opts.seed, Stream::ga, idx);
    rec.ga_throughput = ga_optimize(ch, topo, cfg, opts.ga, ga_rng).throughput;
    rec.wmmse_throughput = wmmse(ch, topo, cfg, opts.wmmse).throughput;
    rec.maxpower_throughput = env.throughput(topo, ch, max_power_baseline(cfg));
    Rng random_rng = make_rng(opts.seed, Stream::random_baseline, idx);
    rec.random_throughput =
        env.throughput(topo, ch, random_power_baseline(env.actions(), cfg.num_cells, random_rng).allocation);
    return rec;
}

std::vector<TestRecord> test(const Environment& env, const Mlp& net, const TestOptions& opts) {
    std::vector<TestRecord> out(static_cast<std::size_t>(std::max(opts.samples, 0)));
    const int workers = std::clamp(opts.threads, 1, std::max(opts.samples, 1));
    if (workers == 1) {
        for (int i = 0; i < opts.samples; ++i) out[static_cast<std::size_t>(i)] = test_sample(env, net, opts, i);
        return out;
    }
    std::vector<std::future<void>> jobs;
    for (int w = 0; w < workers; ++w) {
        jobs.push_back(std::async(std::launch::async, [&, w] {
            for (int i = w; i < opts.samples; i += workers)
                out[static_cast<std::size_t>(i)] = test_sample(env, net, opts, i);
        }));
    }
    for (auto& j : jobs) j.get();
    return out;
}

}  // namespace dqlpa
