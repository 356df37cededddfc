#include "dqlpa/agent.hpp"

#include <doctest.h>

#include <set>
#include <sstream>

using namespace dqlpa;

namespace {

ScenarioConfig one_link() {
    ScenarioConfig sc;
    sc.num_cells = 1;
    sc.users_per_cell = 1;
    sc.num_subbands = 1;
    sc.power_levels_w = {1.0, 2.0};
    sc.max_power_w = 2.0;
    sc.fixed_power_level_w = 2.0;
    return sc;
}

Topology one_user_topology() {
    Topology t;
    t.num_cells = 1;
    t.users_per_cell = 1;
    t.cell_radius_m = 500;
    t.bs_positions = {{0, 0}};
    t.user_positions = {{100, 0}};
    t.serving_cell = {0};
    t.serving_distance_m = {100};
    return t;
}

ScenarioConfig small_scenario() {
    ScenarioConfig sc;
    sc.num_cells = 2;
    sc.users_per_cell = 2;
    sc.num_subbands = 2;
    sc.power_levels_w = {6.4, 12.8, 19.2};
    sc.max_power_w = 32;
    return sc;
}

AgentConfig quick_agent(long steps) {
    AgentConfig a;
    a.train_steps = steps;
    a.batch_size = 16;
    a.learning_starts = 50;
    a.target_update_steps = 25;
    a.replay_capacity = 500;
    return a;
}

void run_to_episode_boundary(Trainer& t, long min_steps) {
    while (t.env_steps() < min_steps || t.episode_active()) t.step();
}

}  // namespace

TEST_CASE("select_joint_action") {
    Rng rng(1);
    SUBCASE("greedy picks the per-cell argmax") {
        const std::vector<double> q{1, 5, 2, 7, 0, 3};
        CHECK(select_joint_action(q, 2, 0.0, rng) == JointAction{1, 0});
    }
    SUBCASE("ties go to the lowest index") {
        const std::vector<double> q{4, 4, 1, 2, 2, 2};
        CHECK(select_joint_action(q, 2, 0.0, rng) == JointAction{0, 0});
    }
    SUBCASE("adding a constant per cell does not change the greedy choice") {
        std::normal_distribution<double> g(0, 1);
        for (int rep = 0; rep < 100; ++rep) {
            std::vector<double> q(12);
            for (double& v : q) v = g(rng);
            std::vector<double> shifted = q;
            for (int i = 0; i < 4; ++i) shifted[static_cast<std::size_t>(i)] += 10;
            for (int i = 4; i < 8; ++i) shifted[static_cast<std::size_t>(i)] -= 3;
            CHECK(select_joint_action(q, 3, 0.0, rng) == select_joint_action(shifted, 3, 0.0, rng));
        }
    }
    SUBCASE("epsilon 1 is uniform per cell") {
        const std::vector<double> q{0, 0, 0, 9, 0, 0, 0, 0};
        std::vector<int> counts(4, 0);
        const int n = 40000;
        for (int i = 0; i < n; ++i) {
            const JointAction a = select_joint_action(q, 2, 1.0, rng);
            ++counts[static_cast<std::size_t>(a[0])];
            CHECK(a[1] >= 0);
            CHECK(a[1] < 4);
        }
        for (int c : counts) CHECK(c / static_cast<double>(n) == doctest::Approx(0.25).epsilon(0.08));
    }
}

TEST_CASE("bellman targets") {
    Rng rng(2);
    const Mlp target = Mlp::he_normal({3, 8, 6}, rng);  // K = 2, m = 3
    std::vector<Transition> data;
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 10; ++i) {
        Transition t;
        t.state.values = {u(rng), u(rng), u(rng)};
        t.next_state.values = {u(rng), u(rng), u(rng)};
        t.joint_action = {i % 3, (i + 1) % 3};
        t.reward = i % 2 ? 1.0 : -1.0;
        t.terminal = i % 3 == 0;
        data.push_back(t);
    }
    std::vector<std::reference_wrapper<const Transition>> batch(data.begin(), data.end());

    SUBCASE("independent recomputation") {
        const auto y = bellman_targets(target, batch, 0.9, 2, 3);
        REQUIRE(y.size() == 20u);
        for (std::size_t j = 0; j < data.size(); ++j) {
            const Eigen::VectorXd q = target.forward(data[j].next_state.values);
            for (int k = 0; k < 2; ++k) {
                double expect = data[j].reward;
                if (!data[j].terminal) expect += 0.9 * q.segment(k * 3, 3).maxCoeff();
                CHECK(std::abs(y[j * 2 + static_cast<std::size_t>(k)] - expect) < 1e-12);
            }
        }
    }
    SUBCASE("zero discount gives the rewards") {
        const auto y = bellman_targets(target, batch, 0.0, 2, 3);
        for (std::size_t j = 0; j < data.size(); ++j) {
            CHECK(y[2 * j] == data[j].reward);
            CHECK(y[2 * j + 1] == data[j].reward);
        }
    }
    SUBCASE("train batch layout") {
        const TrainBatch tb = make_train_batch(batch, std::vector<double>(20, 0.5), 2, 3);
        CHECK(tb.size() == 10);
        CHECK(tb.cells == 2);
        CHECK(tb.actions_per_cell == 3);
        CHECK(tb.actions[2] == 1);
        CHECK(tb.actions[3] == 2);
        CHECK(tb.states(1, 4) == data[4].state.values[1]);
    }
}

TEST_CASE("trainer bookkeeping") {
    Environment env(small_scenario());
    SUBCASE("one gradient step per environment step past the gate") {
        Trainer t(env, quick_agent(300), 11);
        const long gate = quick_agent(300).training_gate();
        for (int i = 0; i < 300; ++i) {
            t.step();
            CHECK(t.gradient_steps() == std::max(0L, t.env_steps() - gate + 1));
        }
        CHECK(t.buffer().size() == 300u);
    }
    SUBCASE("target network only changes every B gradient steps") {
        AgentConfig cfg = quick_agent(400);
        Trainer t(env, cfg, 12);
        std::uint64_t h = t.target().hash();
        CHECK(h == t.online().hash());
        for (int i = 0; i < 400; ++i) {
            const long before = t.gradient_steps();
            t.step();
            const bool synced = t.gradient_steps() != before && t.gradient_steps() % cfg.target_update_steps == 0;
            if (synced) {
                CHECK(t.target().hash() == t.online().hash());
                CHECK(t.target().hash() != h);
                h = t.target().hash();
            } else {
                CHECK(t.target().hash() == h);
            }
        }
    }
    SUBCASE("B = 1 keeps target equal to online") {
        AgentConfig cfg = quick_agent(200);
        cfg.target_update_steps = 1;
        Trainer t(env, cfg, 13);
        for (int i = 0; i < 200; ++i) {
            t.step();
            CHECK(t.target().hash() == t.online().hash());
        }
    }
    SUBCASE("gate is capped by the replay capacity") {
        AgentConfig cfg = quick_agent(100);
        cfg.learning_starts = 1000;
        cfg.replay_capacity = 40;
        Trainer t(env, cfg, 14);
        t.run();
        CHECK(t.gradient_steps() == 100 - 40 + 1);
    }
    SUBCASE("log rows describe finished episodes") {
        Trainer t(env, quick_agent(500), 15);
        t.run();
        long steps = 0;
        for (const auto& row : t.log()) {
            steps += row.episode_length;
            CHECK(row.step == steps);
            CHECK(row.episode_length >= 1);
        }
        CHECK(static_cast<long>(t.log().size()) == t.episodes());
    }
}

TEST_CASE("same seed, same training") {
    Environment env(small_scenario());
    const TrainResult a = train(env, quick_agent(400), 21);
    const TrainResult b = train(env, quick_agent(400), 21);
    const TrainResult c = train(env, quick_agent(400), 22);
    CHECK(a.network.hash() == b.network.hash());
    CHECK(a.network.hash() != c.network.hash());
    CHECK(a.gradient_steps == b.gradient_steps);
}

TEST_CASE("resuming from a snapshot matches an uninterrupted run") {
    Environment env(small_scenario());
    const AgentConfig cfg = quick_agent(600);
    Trainer straight(env, cfg, 31);
    Trainer first(env, cfg, 31);
    run_to_episode_boundary(first, 250);
    std::stringstream snap;
    first.save(snap);
    Trainer resumed = Trainer::load(env, cfg, snap);
    CHECK(resumed.env_steps() == first.env_steps());
    resumed.run();
    straight.run();
    CHECK(resumed.online().hash() == straight.online().hash());
    CHECK(resumed.target().hash() == straight.target().hash());
    CHECK(resumed.gradient_steps() == straight.gradient_steps());
    CHECK(resumed.log().size() == straight.log().size());

    Trainer mid(env, cfg, 31);
    while (!mid.episode_active()) mid.step();
    std::stringstream ignored;
    CHECK_THROWS_AS(mid.save(ignored), UsageError);
}

TEST_CASE("a single link learns to raise its power") {
    Environment env(one_link());
    env.freeze_channel(one_user_topology(), ChannelRealization(1, 1, 1, 1.0, 1.0));
    AgentConfig cfg = quick_agent(2000);
    cfg.learning_rate = 0.005;
    const TrainResult r = train(env, cfg, 41);

    Rng rng(5);
    for (int rep = 0; rep < 10; ++rep) {
        auto [ctx, s] = env.reset(rng);
        const Eigen::VectorXd q = r.network.forward(s.values);
        CHECK(q(1) > q(0));
        const GreedyOutcome g = greedy_episode(env, r.network, ctx, s);
        CHECK(g.action == JointAction{1});
        CHECK(g.length == 2);
        CHECK(g.throughput == env.throughput(ctx, env.allocation(JointAction{1})));
    }
}

TEST_CASE("greedy episode that terminates immediately keeps the initial allocation") {
    Environment env(one_link());
    env.freeze_channel(one_user_topology(), ChannelRealization(1, 1, 1, 1.0, 1.0));
    Mlp net(2, 2, 2);
    net.params().output_bias(0) = 1.0;  // always picks the minimum level
    Rng rng(6);
    auto [ctx, s] = env.reset(rng);
    const GreedyOutcome g = greedy_episode(env, net, ctx, s);
    CHECK(g.length == 1);
    CHECK(g.action == ctx.initial_action);
    CHECK(g.throughput == ctx.initial_throughput);
}

TEST_CASE("test bookkeeping") {
    ScenarioConfig sc = small_scenario();
    Environment env(sc);
    Rng rng(7);
    const Mlp net = Mlp::he_normal(network_sizes(env, AgentConfig{}), rng);
    TestOptions opts;
    opts.samples = 12;
    opts.seed = 3;
    opts.ga.population = 20;
    opts.ga.generations = 10;
    const auto records = test(env, net, opts);
    REQUIRE(records.size() == 12u);
    std::set<std::uint64_t> seeds;
    for (int i = 0; i < 12; ++i) {
        const TestRecord& r = records[static_cast<std::size_t>(i)];
        CHECK(r.sample == i);
        CHECK(r.channel_seed == derive_seed(3, static_cast<std::uint64_t>(Stream::test_channel),
                                            static_cast<std::uint64_t>(i)));
        seeds.insert(r.channel_seed);
        CHECK(r.dql_action.size() == 2u);
        CHECK(r.ga_throughput > 0);
        CHECK(r.wmmse_throughput > 0);
        CHECK(r.maxpower_throughput > 0);
        CHECK(r.random_throughput > 0);
        CHECK(r.dql_episode_length >= 1);
    }
    CHECK(seeds.size() == 12u);

    opts.threads = 3;
    const auto parallel = test(env, net, opts);
    for (std::size_t i = 0; i < 12; ++i) {
        CHECK(parallel[i].dql_throughput == records[i].dql_throughput);
        CHECK(parallel[i].ga_throughput == records[i].ga_throughput);
        CHECK(parallel[i].random_throughput == records[i].random_throughput);
    }
    // a sample does not depend on how many samples run
    CHECK(test_sample(env, net, opts, 7).ga_throughput == records[7].ga_throughput);
}
