// End-to-end acceptance checks. Every criterion prints exactly one line that
// starts with PASS or FAIL followed by the measured numbers. The process exits
// with 1 if any selected criterion fails.
//
//   acceptance [--only C1,C7,...] [--work DIR]
//
// The learning criteria share trained policies: one multi-object tabletop
// policy per seed is the curriculum start and is also the learned policy of
// the tabletop comparisons.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geotact/app/commands.hpp"
#include "geotact/baselines/a2g.hpp"
#include "support.hpp"

namespace geotact {
namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kSeeds[] = {1, 2, 3};
constexpr int kTrials = 200;

const std::vector<std::string> kTabletopTrainObjects{"square", "long-bar", "disc", "L-shape"};
const std::vector<std::string> kTabletopEvalObjects{"square", "long-bar", "L-shape"};
const std::vector<std::string> kGranularObjects{"square", "long-bar", "disc"};
constexpr long kTabletopSteps = 400000;
constexpr long kGranularSteps = 300000;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void progress(const std::string& line) {
  std::fprintf(stderr, "  %s\n", line.c_str());
  std::fflush(stderr);
}

RunConfig base_config(std::uint64_t seed, WorldMode mode, const std::vector<std::string>& objects) {
  RunConfig c;
  c.seed = seed;
  c.env.world.mode = mode;
  c.objects = objects;
  c.eval.trials = kTrials;
  return c;
}

TrainOutcome train_logged(const RunConfig& cfg, ActorCritic init, const std::string& tag) {
  const auto t0 = std::chrono::steady_clock::now();
  return train_policy(cfg, std::move(init), [&](const UpdateRecord& r, const ActorCritic&) {
    if (r.update % 25 == 0)
      progress(fmt("[%s] update %d steps %ld running %.3f (%.0fs)", tag.c_str(), r.update, r.env_steps, r.running_success, seconds_since(t0)));
  });
}

// Trained policies, built on first use and shared between criteria.
class Policies {
 public:
  const TrainOutcome& tabletop(std::uint64_t seed) {
    auto& slot = tabletop_[seed];
    if (!slot) {
      RunConfig c = base_config(seed, WorldMode::kTabletop, kTabletopTrainObjects);
      c.train.total_steps = kTabletopSteps;
      slot = std::make_unique<TrainOutcome>(train_logged(c, init_params(seed, c.agent), fmt("tabletop seed %llu", (unsigned long long)seed)));
    }
    return *slot;
  }

  const TrainOutcome& curriculum(std::uint64_t seed) {
    auto& slot = curriculum_[seed];
    if (!slot) {
      RunConfig c = base_config(seed, WorldMode::kGranular, kGranularObjects);
      c.train.total_steps = kGranularSteps;
      slot = std::make_unique<TrainOutcome>(train_logged(c, tabletop(seed).net, fmt("finetune seed %llu", (unsigned long long)seed)));
    }
    return *slot;
  }

  const TrainOutcome& scratch(std::uint64_t seed) {
    auto& slot = scratch_[seed];
    if (!slot) {
      RunConfig c = base_config(seed, WorldMode::kGranular, kGranularObjects);
      c.train.total_steps = kGranularSteps;
      slot = std::make_unique<TrainOutcome>(train_logged(c, init_params(seed, c.agent), fmt("scratch seed %llu", (unsigned long long)seed)));
    }
    return *slot;
  }

 private:
  std::map<std::uint64_t, std::unique_ptr<TrainOutcome>> tabletop_, curriculum_, scratch_;
};

Controller learned(const ActorCritic& net, const std::string& name) { return Controller::learned(std::make_shared<ActorCritic>(net), name); }

std::string rates(const EvalTable& t) {
  std::string s;
  for (const auto& r : t.rows) s += fmt("%s %.3f, ", r.object.c_str(), r.success_rate());
  return s + fmt("avg %.3f", t.average());
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

// Criterion 1: square-only tabletop training reaches a full-window running
// success of 0.85 within 500k steps for at least two of three seeds.
Verdict c1_tabletop_learning(Policies&) {
  int reached = 0;
  std::string detail;
  for (std::uint64_t seed : kSeeds) {
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig c = base_config(seed, WorldMode::kTabletop, {"square"});
    c.train.total_steps = 500000;
    const TrainOutcome out = train_logged(c, init_params(seed, c.agent), fmt("square seed %llu", (unsigned long long)seed));
    long first = -1;
    for (const auto& r : out.metrics.records()) {
      if (r.window_full && r.running >= 0.85) {
        first = r.env_steps;
        break;
      }
    }
    if (first >= 0) ++reached;
    detail += fmt("seed %llu best %.3f reached@%ld (%.0fs); ", (unsigned long long)seed, out.metrics.best_full_window(), first, seconds_since(t0));
  }
  return {reached >= 2, fmt("%d/3 seeds reach 0.85: ", reached) + detail};
}

// Criterion 2: the learned tabletop policy beats A2G on tabletop by 0.10.
Verdict c2_learned_beats_a2g(Policies& p) {
  const RunConfig c = base_config(1, WorldMode::kTabletop, kTabletopEvalObjects);
  const EvalTable net = evaluate(c, learned(p.tabletop(1).net, "tabletop"));
  const EvalTable a2g = evaluate(c, Controller::a2g(1));
  const double margin = net.average() - a2g.average();
  return {margin >= 0.10, fmt("margin %.3f; learned [", margin) + rates(net) + "]; a2g [" + rates(a2g) + "]"};
}

// Criterion 3: granular fine-tuning lifts granular success by 0.15.
Verdict c3_finetuning_helps(Policies& p) {
  const RunConfig c = base_config(1, WorldMode::kGranular, kGranularObjects);
  const EvalTable before = evaluate(c, learned(p.tabletop(1).net, "tabletop"));
  const EvalTable after = evaluate(c, learned(p.curriculum(1).net, "finetuned"));
  const double gain = after.average() - before.average();
  return {gain >= 0.15, fmt("gain %.3f; finetuned [", gain) + rates(after) + "]; tabletop [" + rates(before) + "]"};
}

// Criterion 4: curriculum ends at least as high as from-scratch at equal
// granular budgets, for at least two of three seeds.
Verdict c4_curriculum_beats_scratch(Policies& p) {
  int wins = 0;
  std::string detail;
  for (std::uint64_t seed : kSeeds) {
    const double cur = p.curriculum(seed).metrics.final_running();
    const double scr = p.scratch(seed).metrics.final_running();
    wins += cur >= scr ? 1 : 0;
    detail += fmt("seed %llu curriculum %.3f scratch %.3f; ", (unsigned long long)seed, cur, scr);
  }
  return {wins >= 2, fmt("%d/3 seeds, %ld granular steps each: ", wins, kGranularSteps) + detail};
}

// Criterion 5: A2G loses at least half its success between 0.2 N and 3 N of
// force noise, and the learned policy keeps strictly more of its own.
Verdict c5_noise_robustness(Policies& p) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig c = base_config(1, WorldMode::kTabletop, kTabletopEvalObjects);
  c.eval.noise_grid = {0.2, 1.0, 2.0, 3.0};
  const ActorCritic& net = p.tabletop(1).net;
  std::vector<EvalTable> net_cells, a2g_cells;
  for (double noise : c.eval.noise_grid) {
    RunConfig cell = c;
    cell.env.sensor.force_noise_halfwidth = noise;
    net_cells.push_back(evaluate(cell, learned(net, "tabletop")));
    a2g_cells.push_back(evaluate(cell, Controller::a2g(1)));
  }
  auto retention = [](const std::vector<EvalTable>& cells) {
    return cells.front().average() > 0.0 ? cells.back().average() / cells.front().average() : 0.0;
  };
  const double a2g_keep = retention(a2g_cells), net_keep = retention(net_cells);
  std::string curve = "learned";
  for (const auto& t : net_cells) curve += fmt(" %.3f", t.average());
  curve += ", a2g";
  for (const auto& t : a2g_cells) curve += fmt(" %.3f", t.average());
  const bool pass = a2g_cells.back().average() <= 0.5 * a2g_cells.front().average() && net_keep > a2g_keep;
  return {pass, fmt("retention learned %.3f a2g %.3f; %s (sweep %.0fs)", net_keep, a2g_keep, curve.c_str(), seconds_since(t0))};
}

// Criterion 6: with spurious contacts on, A2G-push does at least as well as
// A2G in granular media.
Verdict c6_a2g_push_ordering(Policies&) {
  const RunConfig c = base_config(1, WorldMode::kGranular, kGranularObjects);
  const EvalTable push = evaluate(c, Controller::a2g(kA2gPushContacts));
  const EvalTable plain = evaluate(c, Controller::a2g(1));
  return {push.average() >= plain.average(), "a2g-push [" + rates(push) + "]; a2g [" + rates(plain) + "]"};
}

// Criterion 7: dense rewards telescope over push-only trajectories.
Verdict c7_reward_telescoping(Policies&) {
  Rng pick(7);
  double worst = 0.0;
  int trajectories = 0;
  std::uint64_t seed = 0;
  const std::vector<std::string> objects{"square", "long-bar", "disc", "L-shape", "pentagram", "small-disc", "rectangle"};
  while (trajectories < 1000) {
    EnvConfig cfg;
    // Every fourth trajectory runs in granular media, cut to 30 steps to keep
    // the check fast; the identity holds for any prefix.
    const bool granular = trajectories % 4 == 3;
    cfg.world.mode = granular ? WorldMode::kGranular : WorldMode::kTabletop;
    GraspEnv env(cfg);
    const ShapeId object = shape_id(objects[seed % objects.size()]);
    if (!env.reset(object, seed++)) continue;
    const double d0 = env.distance();
    double sum = 0.0, d_last = d0;
    const int cap = granular ? 30 : 1000;
    for (int k = 0; k < cap && !env.done(); ++k) {
      Action a = Action::from_index(static_cast<int>(pick.index(kActionCount)));
      a.grasp = 0;
      const StepResult r = env.step(a);
      sum += r.reward;
      d_last = r.info.d_t;
    }
    const RewardConfig& rc = cfg.reward;
    const double expected = rc.alpha * (1.0 / (d_last + rc.offset) - 1.0 / (d0 + rc.offset));
    worst = std::max(worst, std::abs(sum - expected));
    ++trajectories;
  }
  return {worst <= 1e-9, fmt("%d trajectories, max |sum - closed form| %.3e", trajectories, worst)};
}

// Criterion 8: analytic PPO gradients against central differences.
Verdict c8_gradient_oracle(Policies&) {
  const double h = 1e-5;
  // Relative error with a floor: gradients below 1e-7 in magnitude are
  // compared absolutely, where the finite difference has no relative meaning.
  auto rel_err = [](double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale < 1e-7 ? std::abs(a - b) : std::abs(a - b) / scale;
  };
  PolicyConfig arch;
  arch.hidden_width = 6;
  arch.hidden_layers = 2;
  arch.actor_output_gain = 1.0;
  const PpoConfig cfg;
  Rng rng(8);
  double worst = 0.0;
  long checked = 0;
  for (int b = 0; b < 20; ++b) {
    ActorCritic net = init_params(100 + b, arch);
    PpoBatch batch;
    const int n = 3 + static_cast<int>(rng.index(6));
    batch.observations.resize(kObservationSize, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < kObservationSize; ++i) batch.observations(i, j) = rng.uniform(-1.0, 1.0);
    const Eigen::MatrixXd logits = forward(net.actor, batch.observations);
    batch.old_log_probs.resize(n);
    batch.advantages.resize(n);
    batch.returns.resize(n);
    for (int j = 0; j < n; ++j) {
      const Action a = Action::from_index(static_cast<int>(rng.index(kActionCount)));
      batch.heads.push_back(a.heads());
      // Ratios stay clear of the clip kinks, where the loss is not differentiable.
      double shift = 0.0;
      do shift = rng.uniform(-0.5, 0.5);
      while (std::abs(std::abs(shift) - std::log(1.2)) < 0.02 || std::abs(std::abs(shift) - std::log(1.0 / 0.8)) < 0.02);
      batch.old_log_probs(j) = action_log_prob(logits.col(j), a.heads()) - shift;
      batch.advantages(j) = rng.uniform(-2.0, 2.0);
      batch.returns(j) = rng.uniform(-1.0, 1.0);
    }
    ActorCriticGrad g;
    ppo_loss(net, batch, cfg, &g);
    for (auto [which, grad] : {std::pair{&ActorCritic::actor, &g.actor}, std::pair{&ActorCritic::critic, &g.critic}}) {
      for (std::size_t li = 0; li < (net.*which).layers.size(); ++li) {
        DenseLayer& l = (net.*which).layers[li];
        auto probe = [&](double& param, double analytic) {
          const double keep = param;
          param = keep + h;
          const double up = ppo_loss(net, batch, cfg).total;
          param = keep - h;
          const double down = ppo_loss(net, batch, cfg).total;
          param = keep;
          worst = std::max(worst, rel_err((up - down) / (2 * h), analytic));
          ++checked;
        };
        for (Eigen::Index k = 0; k < l.w.size(); ++k) probe(l.w.data()[k], grad->w[li].data()[k]);
        for (Eigen::Index k = 0; k < l.b.size(); ++k) probe(l.b(k), grad->b[li](k));
      }
    }
  }
  return {worst <= 1e-4, fmt("20 batches, %ld parameters, max relative error %.3e", checked, worst)};
}

// Criterion 9: resolution leaves no overlap, fingers are never pushed back,
// and every reported force is exactly k_c times the geometric penetration.
Verdict c9_physics_suite(Policies&) {
  Rng rng(9);
  double worst_penetration = 0.0, worst_force = 0.0;
  int finger_moves = 0, states = 0;
  long contacts = 0;
  const std::vector<std::string> objects{"square", "long-bar", "disc", "L-shape", "pentagram", "small-disc", "rectangle"};
  for (; states < 500; ++states) {
    WorldConfig c;
    c.mode = WorldMode::kGranular;
    WorldState s = build_world(c, shape_id(objects[states % objects.size()]), rng);
    const int moves = 1 + static_cast<int>(rng.index(12));
    for (int k = 0; k < moves; ++k) {
      const Action a = Action::from_index(static_cast<int>(rng.index(kActionCount)));
      const GripperState before = s.gripper;
      const StepOutcome out = step_world(s, a.translation(), a.rotation());
      if (!out.clamped) {
        const Vec2 want = before.position + a.translation();
        if (norm(s.gripper.position - want) > 1e-12 || std::abs(wrap_angle(s.gripper.angle - before.angle - a.rotation())) > 1e-12) ++finger_moves;
      }
    }
    const GripperState frozen = s.gripper;
    detail::relax(s, c.resolution_iterations);
    if (!(s.gripper.position == frozen.position) || s.gripper.angle != frozen.angle) ++finger_moves;

    worst_penetration = std::max(worst_penetration, testing::brute_force_penetration(s));
    const auto f = fingers(s.gripper, c.finger_radius);
    for (const ContactEvent& e : detect_contacts(s)) {
      const Vec2 center = f[static_cast<int>(e.side)].center;
      const double depth = e.source == ContactSource::kParticle
                               ? c.particle_radius + c.finger_radius - norm(s.particles[static_cast<std::size_t>(e.body)] - center)
                               : testing::object_overlap(s, center, c.finger_radius);
      worst_force = std::max(worst_force, std::abs(e.force_magnitude - c.contact_stiffness * depth));
      if (e.force_magnitude != c.contact_stiffness * e.penetration) worst_force = INFINITY;
      ++contacts;
    }
  }
  const bool pass = worst_penetration <= 1e-4 && finger_moves == 0 && worst_force <= 1e-9;
  return {pass, fmt("%d states, max residual %.3e m, finger displacements %d, %ld contacts, max |F - k_c*pen| %.3e N", states,
                    worst_penetration, finger_moves, contacts, worst_force)};
}

// Criterion 10: the sensing pipeline's documented boundary behavior.
Verdict c10_sensing_suite(Policies&) {
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const char* what) {
    if (!ok) failures.push_back(what);
  };
  const SensorConfig cfg;
  auto event = [](double force, Vec2 location, Vec2 normal) {
    ContactEvent e;
    e.side = FingerSide::kLeft;
    e.force_magnitude = force;
    e.location = location;
    e.normal = normal;
    return e;
  };
  const std::vector<ContactEvent> below{event(2.999, {0.001, 0.0}, {1.0, 0.0})};
  const std::vector<ContactEvent> above{event(3.001, {0.001, 0.0}, {1.0, 0.0})};
  expect(!filter_and_select(below, FingerSide::kLeft, cfg).present, "2.999 N accepted");
  expect(filter_and_select(above, FingerSide::kLeft, cfg).present, "3.001 N rejected");

  const std::vector<ContactEvent> several{event(3.5, {0.001, 0.002}, {1.0, 0.0}), event(6.0, {0.003, 0.004}, {0.0, 1.0}),
                                          event(1.0, {0.005, 0.006}, {-1.0, 0.0})};
  const FingerSample pick = filter_and_select(several, FingerSide::kLeft, cfg);
  expect(pick.location == Vec3{0.003, 0.004, 0.0}, "location is not the largest force");
  expect(pick.net_force == Vec3{3.5, 6.0, 0.0}, "net force is not the sum of survivors");

  const FingerSample none = filter_and_select(below, FingerSide::kLeft, cfg);
  ObservationWindow w;
  w = push_step(w, none, none, Action{});
  const std::vector<double> flat = flatten(w);
  expect(flat.size() == 160, "flattened window is not 160 long");
  expect(std::all_of(flat.begin(), flat.end(), [](double v) { return v == 0.0; }), "absent contact is not zero-filled");

  Rng rng(10);
  double loc_max = 0.0, force_max = 0.0;
  const FingerSample zero = make_sample({0.0, 0.0}, {0.0, 0.0});
  for (int i = 0; i < 100000; ++i) {
    const FingerSample n = apply_noise(zero, cfg, rng);
    loc_max = std::max({loc_max, std::abs(n.location[0]), std::abs(n.location[1])});
    force_max = std::max({force_max, std::abs(n.net_force[0]), std::abs(n.net_force[1])});
    if (n.location[2] != 0.0 || n.net_force[2] != 0.0) failures.push_back("out-of-plane noise");
  }
  expect(loc_max <= cfg.loc_noise_halfwidth && loc_max > 0.999 * cfg.loc_noise_halfwidth, "location noise support");
  expect(force_max <= cfg.force_noise_halfwidth && force_max > 0.999 * cfg.force_noise_halfwidth, "force noise support");

  std::string detail = fmt("noise max |loc| %.6f (bound %.3f), max |force| %.6f (bound %.3f), flat size %zu", loc_max, cfg.loc_noise_halfwidth,
                           force_max, cfg.force_noise_halfwidth, flat.size());
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty(), detail};
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream f(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    files[fs::relative(e.path(), root).string()] = ss.str();
  }
  return files;
}

// Criterion 11: two full train/eval/replay runs produce identical bytes.
Verdict c11_determinism(Policies&, const fs::path& work) {
  const fs::path base = work / "c11";
  fs::remove_all(base);
  const fs::path cwd = fs::current_path();
  std::vector<std::map<std::string, std::string>> trees;
  for (const char* run : {"run_a", "run_b"}) {
    const fs::path dir = base / run;
    fs::create_directories(dir);
    // Relative paths keep the directory name out of the artifacts.
    fs::current_path(dir);
    RunConfig c = base_config(5, WorldMode::kTabletop, {"square", "L-shape"});
    c.train.total_steps = 16384;
    std::ostringstream log;
    cmd_train(c, "train", log);
    RunConfig e = c;
    e.env.world.mode = WorldMode::kGranular;
    e.eval.trials = 4;
    cmd_eval("train/" + std::string(kCheckpointName), e, "eval", 2);
    cmd_eval("a2g-push", e, "eval_a2g", 1);
    cmd_replay("eval/logs/square_0.log", "frames");
    std::ofstream("train/stdout.txt") << log.str();
    fs::current_path(cwd);
    trees.push_back(read_tree(dir));
  }
  int differing = 0;
  for (const auto& [name, bytes] : trees[0]) {
    auto it = trees[1].find(name);
    if (it == trees[1].end() || it->second != bytes) ++differing;
  }
  if (trees[0].size() != trees[1].size()) ++differing;
  std::size_t total = 0;
  for (const auto& [name, bytes] : trees[0]) total += bytes.size();
  return {differing == 0 && trees[0].size() > 5, fmt("%zu files, %zu bytes per run, %d differ", trees[0].size(), total, differing)};
}

// Criterion 12: granule brushes rarely pass the 3 N filter, while pushes on
// the object register within three steps.
Verdict c12_force_calibration(Policies&) {
  WorldConfig c;
  c.mode = WorldMode::kGranular;
  const SensorConfig sensor;
  auto registers = [&](const std::vector<ContactEvent>& contacts) {
    return filter_and_select(contacts, FingerSide::kLeft, sensor).present || filter_and_select(contacts, FingerSide::kRight, sensor).present;
  };
  const std::vector<std::string> objects{"square", "long-bar", "disc", "L-shape", "pentagram", "small-disc", "rectangle"};

  // Brushes: random motions through the pile with the object moved far out of reach.
  Rng rng(12);
  int brush_hits = 0, brushes = 0;
  for (int world = 0; brushes < 1000; ++world) {
    WorldState s = build_world(c, shape_id(objects[world % objects.size()]), rng);
    s.object.position = {c.workspace_width - 0.05, c.workspace_height - 0.05};
    resolve_penetrations(s, c.resolution_iterations);
    for (int k = 0; k < 20 && brushes < 1000; ++k) {
      const Action a = Action::from_index(static_cast<int>(rng.index(kActionCount)));
      const StepOutcome out = step_world(s, a.translation(), a.rotation());
      const bool touches_object = std::any_of(out.contacts.begin(), out.contacts.end(), [](const ContactEvent& e) { return e.source == ContactSource::kObject; });
      if (touches_object) break;
      brush_hits += registers(out.contacts) ? 1 : 0;
      ++brushes;
    }
  }

  // Pushes: the targeted finger is aimed at the object's centroid and driven
  // forward until it is within 1 cm of the surface, then three more steps.
  int push_hits = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Rng wr(mix_seed(12, trial));
    WorldState s = build_world(c, shape_id(objects[trial % objects.size()]), wr);
    const int target = static_cast<int>(s.targeted_finger);
    s.gripper.position.x += s.object.position.x - fingers(s.gripper, c.finger_radius)[target].center.x;
    resolve_penetrations(s, c.resolution_iterations);
    for (int k = 0; k < 40; ++k) {
      const auto f = fingers(s.gripper, c.finger_radius)[target];
      if (testing::object_overlap(s, f.center, f.radius + 0.01) > 0.0) break;
      step_world(s, {0.0, kTranslationPrimitive}, 0.0);
    }
    bool hit = false;
    for (int k = 0; k < 3 && !hit; ++k) hit = registers(step_world(s, {0.0, kTranslationPrimitive}, 0.0).contacts);
    push_hits += hit ? 1 : 0;
  }
  const double brush_rate = static_cast<double>(brush_hits) / brushes;
  const double push_rate = push_hits / 1000.0;
  return {brush_rate < 0.10 && push_rate > 0.80, fmt("brush steps registering %.3f (%d/%d), pushes registering within 3 steps %.3f", brush_rate,
                                                     brush_hits, brushes, push_rate)};
}

}  // namespace
}  // namespace geotact

int main(int argc, char** argv) {
  using namespace geotact;
  CLI::App app{"Runs the acceptance criteria and prints one PASS/FAIL line per criterion."};
  std::string only;
  std::string work = (fs::temp_directory_path() / "geotact_acceptance").string();
  app.add_option("--only", only, "Comma-separated criteria to run, e.g. C1,C7");
  app.add_option("--work", work, "Scratch directory for file artifacts");
  CLI11_PARSE(app, argc, argv);

  std::set<std::string> selected;
  for (const auto& s : detail::split_list(only)) selected.insert(s);
  fs::create_directories(work);

  Policies policies;
  const fs::path work_dir = fs::absolute(work);
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"C1 tabletop learning", [&] { return c1_tabletop_learning(policies); }},
      {"C2 learned beats A2G on tabletop", [&] { return c2_learned_beats_a2g(policies); }},
      {"C3 granular fine-tuning helps", [&] { return c3_finetuning_helps(policies); }},
      {"C4 curriculum beats scratch", [&] { return c4_curriculum_beats_scratch(policies); }},
      {"C5 noise robustness ordering", [&] { return c5_noise_robustness(policies); }},
      {"C6 A2G-push vs A2G in granular media", [&] { return c6_a2g_push_ordering(policies); }},
      {"C7 reward telescoping", [&] { return c7_reward_telescoping(policies); }},
      {"C8 PPO gradient oracle", [&] { return c8_gradient_oracle(policies); }},
      {"C9 physics suite", [&] { return c9_physics_suite(policies); }},
      {"C10 sensing suite", [&] { return c10_sensing_suite(policies); }},
      {"C11 determinism", [&] { return c11_determinism(policies, work_dir); }},
      {"C12 force calibration", [&] { return c12_force_calibration(policies); }},
  };

  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const std::string id = name.substr(0, name.find(' '));
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::printf("%s %s: %s [%.0fs]\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
