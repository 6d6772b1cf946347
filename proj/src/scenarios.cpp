#include "iwsd/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "iwsd/losses.hpp"
#include "iwsd/random.hpp"

namespace iwsd {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec unit_at_angle(double angle) { return Vec{std::cos(angle), std::sin(angle)}; }

Polytope simplex_polytope(int k) {
  std::vector<Vec> vertices;
  for (int i = 0; i < k; ++i) {
    Vec v(static_cast<std::size_t>(k), 0.0);
    v[static_cast<std::size_t>(i)] = 1.0;
    vertices.push_back(std::move(v));
  }
  return Polytope(k, std::move(vertices));
}

Vec categorical_mean(const std::vector<Vec>& atoms, const Vec& probs) {
  Vec mean(atoms[0].size(), 0.0);
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    for (std::size_t c = 0; c < mean.size(); ++c) {
      mean[c] += probs[j] * atoms[j][c];
    }
  }
  return mean;
}

int draw_categorical(const Vec& probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    acc += probs[j];
    if (u < acc) return static_cast<int>(j);
  }
  return static_cast<int>(probs.size()) - 1;
}

void attach_class(Scenario& scenario, const nlohmann::json& class_spec,
                  std::uint64_t seed) {
  scenario.hypotheses = build_hypothesis_class(class_spec, scenario, seed);
  if (scenario.hypotheses.num_designs() != scenario.pool.size()) {
    throw std::invalid_argument("scenario: class design count != pool size");
  }
  if (scenario.hypotheses.dim() != scenario.poly.dimension()) {
    throw std::invalid_argument("scenario: class dimension != decision dimension");
  }
}

}  // namespace

std::vector<Vec> cost_ratio_matrix(double ratio) {
  return {{0.0, 1.0}, {ratio, 0.0}};
}

Scenario cost_sensitive_scenario(const CostSensitiveSpec& spec) {
  const std::size_t k = spec.cost_matrix.size();
  if (k < 2) throw std::invalid_argument("cost_sensitive: cost matrix too small");
  for (std::size_t i = 0; i < k; ++i) {
    if (spec.cost_matrix[i].size() != k) {
      throw std::invalid_argument("cost_sensitive: cost matrix must be square");
    }
    if (spec.cost_matrix[i][i] != 0.0) {
      throw std::invalid_argument("cost_sensitive: diagonal must be zero");
    }
    for (double c : spec.cost_matrix[i]) {
      if (!(c >= 0.0)) throw std::invalid_argument("cost_sensitive: negative cost");
    }
  }

  std::vector<Vec> class_probs = spec.class_probs;
  if (class_probs.empty()) {
    if (k != 2) {
      throw std::invalid_argument(
          "cost_sensitive: positive_rates shortcut needs a 2x2 cost matrix");
    }
    if (spec.positive_rates.empty()) {
      throw std::invalid_argument("cost_sensitive: no class probabilities given");
    }
    for (double q : spec.positive_rates) {
      if (!(q >= 0.0) || !(q <= 1.0)) {
        throw std::invalid_argument("cost_sensitive: positive rate outside [0,1]");
      }
      class_probs.push_back(Vec{1.0 - q, q});
    }
  } else if (!spec.positive_rates.empty()) {
    throw std::invalid_argument(
        "cost_sensitive: give positive_rates or class_probs, not both");
  }
  const int m = static_cast<int>(class_probs.size());
  for (const Vec& p : class_probs) {
    if (p.size() != k) {
      throw std::invalid_argument("cost_sensitive: class_probs row length != k");
    }
    double total = 0.0;
    for (double q : p) {
      if (!(q >= 0.0)) throw std::invalid_argument("cost_sensitive: negative prob");
      total += q;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument("cost_sensitive: class probs must sum to 1");
    }
  }

  // The effective label of true class j is row j of the cost matrix.
  std::vector<Vec> atoms = spec.cost_matrix;

  Scenario scenario{
      spec.mu.empty() ? uniform_design_pool(m)
                      : make_design_pool(uniform_design_pool(m).design_ids, spec.mu),
      simplex_polytope(static_cast<int>(k)),
      HypothesisClass{},
      0.0,
      nullptr,
      {},
      {},
      {}};
  for (const Vec& row : atoms) {
    scenario.rho_c = std::max(scenario.rho_c, norm(row));
  }
  scenario.support.resize(static_cast<std::size_t>(m));
  scenario.conditional_means.resize(static_cast<std::size_t>(m));
  scenario.conditional_sq_norms.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const Vec& probs = class_probs[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < k; ++j) {
      scenario.support[static_cast<std::size_t>(i)].push_back(
          SupportPoint{probs[j], atoms[j]});
    }
    scenario.conditional_means[static_cast<std::size_t>(i)] =
        categorical_mean(atoms, probs);
    double sq = 0.0;
    for (std::size_t j = 0; j < k; ++j) sq += probs[j] * squared_norm(atoms[j]);
    scenario.conditional_sq_norms[static_cast<std::size_t>(i)] = sq;
  }
  scenario.label_oracle = [atoms, class_probs](int design, Rng& rng) {
    return atoms[static_cast<std::size_t>(
        draw_categorical(class_probs[static_cast<std::size_t>(design)], rng))];
  };

  nlohmann::json class_spec = spec.class_spec;
  if (class_spec.is_null() || class_spec.empty()) {
    class_spec = {{"kind", "empirical_mean"}, {"sizes", {10, 25, 50, 100, 10000}}};
  }
  attach_class(scenario, class_spec, spec.seed);
  return scenario;
}

const std::vector<Vec>& default_score_means() {
  // Mean quality scores per (task, model); tasks are summarization,
  // extension, translation, bullet points, sentiment analysis; models are
  // the large flagship model followed by three smaller ones.
  static const std::vector<Vec> kMeans = {
      {5.00, 4.83, 3.94, 4.44},
      {4.96, 2.25, 2.73, 3.72},
      {5.00, 2.16, 2.20, 3.55},
      {4.93, 2.50, 2.26, 4.44},
      {4.66, 2.66, 2.10, 4.83},
  };
  return kMeans;
}

namespace {

void enumerate_assignments(int task, int tasks, int models, int demand,
                           std::vector<int>& capacity_left,
                           std::vector<int>& joint_left,
                           const std::vector<JointCapacity>& joints,
                           Vec& current, std::vector<Vec>& out) {
  if (task == tasks) {
    out.push_back(current);
    if (static_cast<int>(out.size()) > kMaxAssignmentVertices) {
      throw std::invalid_argument("assignment: vertex count exceeds guard");
    }
    return;
  }
  // Choose `demand` distinct models for this task.
  std::vector<int> chosen;
  std::function<void(int)> pick = [&](int start) {
    if (static_cast<int>(chosen.size()) == demand) {
      enumerate_assignments(task + 1, tasks, models, demand, capacity_left,
                            joint_left, joints, current, out);
      return;
    }
    for (int mdl = start; mdl < models; ++mdl) {
      if (capacity_left[static_cast<std::size_t>(mdl)] <= 0) continue;
      bool joint_ok = true;
      for (std::size_t j = 0; j < joints.size(); ++j) {
        const auto& set = joints[j].models;
        if (std::find(set.begin(), set.end(), mdl) != set.end() &&
            joint_left[j] <= 0) {
          joint_ok = false;
          break;
        }
      }
      if (!joint_ok) continue;
      capacity_left[static_cast<std::size_t>(mdl)] -= 1;
      for (std::size_t j = 0; j < joints.size(); ++j) {
        const auto& set = joints[j].models;
        if (std::find(set.begin(), set.end(), mdl) != set.end()) joint_left[j] -= 1;
      }
      current[static_cast<std::size_t>(task * models + mdl)] = 1.0;
      chosen.push_back(mdl);

      pick(mdl + 1);

      chosen.pop_back();
      current[static_cast<std::size_t>(task * models + mdl)] = 0.0;
      capacity_left[static_cast<std::size_t>(mdl)] += 1;
      for (std::size_t j = 0; j < joints.size(); ++j) {
        const auto& set = joints[j].models;
        if (std::find(set.begin(), set.end(), mdl) != set.end()) joint_left[j] += 1;
      }
    }
  };
  pick(0);
}

}  // namespace

std::vector<Vec> enumerate_assignment_vertices(
    int tasks, int models, const std::vector<int>& capacities, int demand,
    const std::vector<JointCapacity>& joint_capacities) {
  if (tasks < 1 || models < 1 || demand < 1) {
    throw std::invalid_argument("assignment: tasks, models, demand must be >= 1");
  }
  if (static_cast<int>(capacities.size()) != models) {
    throw std::invalid_argument("assignment: capacities length != models");
  }
  int total_capacity = 0;
  for (int c : capacities) {
    if (c < 0) throw std::invalid_argument("assignment: negative capacity");
    total_capacity += c;
  }
  if (total_capacity < tasks * demand) {
    throw std::invalid_argument("assignment: total capacity below total demand");
  }
  for (const JointCapacity& j : joint_capacities) {
    for (int mdl : j.models) {
      if (mdl < 0 || mdl >= models) {
        throw std::invalid_argument("assignment: joint capacity model out of range");
      }
    }
  }
  std::vector<int> capacity_left = capacities;
  std::vector<int> joint_left;
  for (const JointCapacity& j : joint_capacities) joint_left.push_back(j.limit);
  Vec current(static_cast<std::size_t>(tasks * models), 0.0);
  std::vector<Vec> out;
  enumerate_assignments(0, tasks, models, demand, capacity_left, joint_left,
                        joint_capacities, current, out);
  return out;
}

Scenario assignment_scenario(const AssignmentSpec& spec) {
  const std::vector<Vec>& means =
      spec.score_means.empty() ? default_score_means() : spec.score_means;
  if (static_cast<int>(means.size()) != spec.tasks) {
    throw std::invalid_argument("assignment: score_means rows != tasks");
  }
  for (const Vec& row : means) {
    if (static_cast<int>(row.size()) != spec.models) {
      throw std::invalid_argument("assignment: score_means cols != models");
    }
  }
  std::vector<Vec> vertices = enumerate_assignment_vertices(
      spec.tasks, spec.models, spec.capacities, spec.demand,
      spec.joint_capacities);

  const int d = spec.tasks * spec.models;
  const Vec mu = spec.mu.empty() ? Vec(5, 0.2) : spec.mu;
  const int m = static_cast<int>(mu.size());

  Scenario scenario{make_design_pool(uniform_design_pool(m).design_ids, mu),
                    Polytope(d, std::move(vertices)),
                    HypothesisClass{},
                    5.0 * std::sqrt(static_cast<double>(d)),
                    nullptr,
                    {},
                    {},
                    {}};

  // Every design shares the score table; labels differ only through noise.
  Vec mean_label(static_cast<std::size_t>(d));
  double sq_norm_mean = 0.0;
  for (int t = 0; t < spec.tasks; ++t) {
    for (int mdl = 0; mdl < spec.models; ++mdl) {
      const double s = means[static_cast<std::size_t>(t)][static_cast<std::size_t>(mdl)];
      const std::size_t e = static_cast<std::size_t>(t * spec.models + mdl);
      mean_label[e] = -clipped_normal_mean(s, spec.noise_sigma, 1.0, 5.0);
      sq_norm_mean += clipped_normal_sq_mean(s, spec.noise_sigma, 1.0, 5.0);
    }
  }
  scenario.conditional_means.assign(static_cast<std::size_t>(m), mean_label);
  scenario.conditional_sq_norms.assign(static_cast<std::size_t>(m), sq_norm_mean);

  const double sigma = spec.noise_sigma;
  const std::vector<Vec> score_table = means;
  const int tasks = spec.tasks;
  const int models = spec.models;
  scenario.label_oracle = [score_table, sigma, tasks, models](int, Rng& rng) {
    Vec label(static_cast<std::size_t>(tasks * models));
    for (int t = 0; t < tasks; ++t) {
      for (int mdl = 0; mdl < models; ++mdl) {
        const double s =
            score_table[static_cast<std::size_t>(t)][static_cast<std::size_t>(mdl)];
        label[static_cast<std::size_t>(t * models + mdl)] =
            -clipped_normal_draw(rng, s, sigma, 1.0, 5.0);
      }
    }
    return label;
  };

  nlohmann::json class_spec = spec.class_spec;
  if (class_spec.is_null() || class_spec.empty()) {
    class_spec = {{"kind", "empirical_mean"}, {"sizes", {1, 3, 5, 7, 10}}};
  }
  attach_class(scenario, class_spec, spec.seed);
  return scenario;
}

Scenario counterexample_scenario(double half_angle, double mean_norm,
                                 double noise_sigma,
                                 std::optional<double> mean_rotation) {
  if (!(half_angle > 0.0) || !(half_angle < kPi / 2.0)) {
    throw std::invalid_argument("counterexample: half_angle must be in (0, pi/2)");
  }
  if (!(mean_norm > 0.0)) {
    throw std::invalid_argument("counterexample: mean_norm must be > 0");
  }
  if (!(noise_sigma >= 0.0)) {
    throw std::invalid_argument("counterexample: noise_sigma must be >= 0");
  }
  const double rotation = mean_rotation.value_or(half_angle / 2.0);
  if (!(rotation > 0.0) || !(rotation < half_angle)) {
    throw std::invalid_argument(
        "counterexample: mean_rotation must lie strictly between 0 and "
        "half_angle");
  }
  const double mean_angle = kPi / 4.0 + rotation;
  const Vec mean = scaled(unit_at_angle(mean_angle), mean_norm);
  const Vec h1 = scaled(unit_at_angle(mean_angle + half_angle), mean_norm);
  const Vec h2 = scaled(unit_at_angle(mean_angle - half_angle), mean_norm);

  Scenario scenario{uniform_design_pool(1),
                    simplex_polytope(2),
                    HypothesisClass{},
                    mean_norm + 6.0 * noise_sigma * std::sqrt(2.0),
                    nullptr,
                    {},
                    {mean},
                    {}};
  const double noise_sq =
      clipped_normal_sq_mean(0.0, noise_sigma, -6.0 * noise_sigma, 6.0 * noise_sigma);
  scenario.conditional_sq_norms = Vec{squared_norm(mean) + 2.0 * noise_sq};

  const double sigma = noise_sigma;
  scenario.label_oracle = [mean, sigma](int, Rng& rng) {
    Vec label = mean;
    for (double& c : label) {
      c += clipped_normal_draw(rng, 0.0, sigma, -6.0 * sigma, 6.0 * sigma);
    }
    return label;
  };

  scenario.hypotheses = make_hypothesis_class(
      {Hypothesis{"h1", {h1}}, Hypothesis{"h2", {h2}}});

  const int w_mean = linear_oracle(scenario.poly, mean).vertex_index;
  const int w1 = linear_oracle(scenario.poly, h1).vertex_index;
  const int w2 = linear_oracle(scenario.poly, h2).vertex_index;
  if (w1 == w2) {
    throw std::invalid_argument(
        "counterexample: both hypotheses share a normal cone");
  }
  if (w_mean != w1 || !(distance_to_degeneracy(scenario.poly, mean) > 0.0)) {
    throw std::invalid_argument(
        "counterexample: mean is not strictly inside the cone of h1");
  }
  return scenario;
}

Scenario normalization_example_scenario(double noise_sigma) {
  if (!(noise_sigma >= 0.0)) {
    throw std::invalid_argument("normalization_example: noise_sigma must be >= 0");
  }
  const double deg = kPi / 180.0;
  const double scale = 10.0;
  const Vec mean1 = scaled(unit_at_angle(55.0 * deg), scale);
  const Vec h1x1 = scaled(unit_at_angle(67.0 * deg), scale);
  const Vec h2x1 = scaled(unit_at_angle(33.0 * deg), scale);
  const Vec u2 = unit_at_angle(120.0 * deg);

  const double a = distance(h1x1, mean1);
  const double b = distance(h2x1, mean1);
  const double diff_x1 = distance(h1x1, h2x1);
  if (!(a + b > diff_x1)) {
    throw std::runtime_error(
        "normalization_example: construction failed (cross distances "
        "infeasible)");
  }
  const double sep = 0.5 * (diff_x1 + (a + b));
  const Vec h1x2 = scaled(u2, scale);
  const Vec h2x2 = scaled(u2, scale + sep);
  // Place the second conditional mean at the prescribed cross distances.
  const double along = (b * b - a * a + sep * sep) / (2.0 * sep);
  const double across_sq = b * b - along * along;
  if (!(across_sq >= 0.0)) {
    throw std::runtime_error(
        "normalization_example: construction failed (no intersection)");
  }
  const Vec perp{-u2[1], u2[0]};
  Vec mean2 = add(h1x2, add(scaled(u2, along), scaled(perp, std::sqrt(across_sq))));

  // The construction promises cross-equal squared distances, a shared
  // direction at x2, and a strictly larger raw disagreement at x2.
  if (std::abs(distance(h2x2, mean2) - a) > 1e-9 ||
      std::abs(distance(h1x2, mean2) - b) > 1e-9 ||
      distance(normalized(h1x2), normalized(h2x2)) > 1e-12 ||
      !(distance(h1x2, h2x2) > diff_x1)) {
    throw std::runtime_error("normalization_example: construction verification "
                             "failed");
  }

  Scenario scenario{uniform_design_pool(2),
                    simplex_polytope(2),
                    HypothesisClass{},
                    std::max(norm(mean1), norm(mean2)) +
                        6.0 * noise_sigma * std::sqrt(2.0),
                    nullptr,
                    {},
                    {mean1, mean2},
                    {}};
  const double noise_sq =
      clipped_normal_sq_mean(0.0, noise_sigma, -6.0 * noise_sigma, 6.0 * noise_sigma);
  scenario.conditional_sq_norms =
      Vec{squared_norm(mean1) + 2.0 * noise_sq, squared_norm(mean2) + 2.0 * noise_sq};

  const std::vector<Vec> means = {mean1, mean2};
  const double sigma = noise_sigma;
  scenario.label_oracle = [means, sigma](int design, Rng& rng) {
    Vec label = means[static_cast<std::size_t>(design)];
    for (double& c : label) {
      c += clipped_normal_draw(rng, 0.0, sigma, -6.0 * sigma, 6.0 * sigma);
    }
    return label;
  };

  scenario.hypotheses = make_hypothesis_class(
      {Hypothesis{"h1", {h1x1, h1x2}}, Hypothesis{"h2", {h2x1, h2x2}}});

  const int w1 = linear_oracle(scenario.poly, h1x1).vertex_index;
  const int w2 = linear_oracle(scenario.poly, h2x1).vertex_index;
  const int wm = linear_oracle(scenario.poly, mean1).vertex_index;
  if (w1 == w2 || wm != w1) {
    throw std::runtime_error(
        "normalization_example: construction verification failed (cones)");
  }
  if (!(exact_excess_risk(scenario.hypotheses.member(1),
                          scenario.hypotheses.member(0), scenario) > 0.0)) {
    throw std::runtime_error(
        "normalization_example: h1 is not the unique decision-risk minimizer");
  }
  return scenario;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double_strict(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw std::invalid_argument(what + ": bad numeric field '" + s + "'");
  }
  return v;
}

}  // namespace

Scenario csv_empirical_scenario(const CsvScenarioSpec& spec) {
  std::ifstream in(spec.path);
  if (!in) throw std::invalid_argument("csv scenario: cannot open " + spec.path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("csv scenario: empty file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "design_id") {
    throw std::invalid_argument(
        "csv scenario: header must be design_id,c_1,...,c_d");
  }
  const int d = static_cast<int>(header.size()) - 1;

  std::vector<std::string> order;
  std::map<std::string, std::vector<Vec>> records;
  std::size_t total = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::invalid_argument("csv scenario: ragged row '" + line + "'");
    }
    Vec label(static_cast<std::size_t>(d));
    for (int c = 0; c < d; ++c) {
      label[static_cast<std::size_t>(c)] =
          parse_double_strict(fields[static_cast<std::size_t>(c) + 1], "csv scenario");
    }
    const std::string& id = fields[0];
    if (records.find(id) == records.end()) order.push_back(id);
    records[id].push_back(std::move(label));
    ++total;
  }
  if (order.empty()) throw std::invalid_argument("csv scenario: no data rows");

  const int m = static_cast<int>(order.size());
  Vec mu(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    mu[static_cast<std::size_t>(i)] =
        static_cast<double>(records[order[static_cast<std::size_t>(i)]].size()) /
        static_cast<double>(total);
  }
  if (!spec.mu_override.is_null() && !spec.mu_override.empty()) {
    if (spec.mu_override.is_array()) {
      const Vec override = spec.mu_override.get<Vec>();
      if (static_cast<int>(override.size()) != m) {
        throw std::invalid_argument("csv scenario: mu override length mismatch");
      }
      mu = override;
    } else if (spec.mu_override.is_object()) {
      for (const auto& [id, prob] : spec.mu_override.items()) {
        const auto it = std::find(order.begin(), order.end(), id);
        if (it == order.end()) {
          throw std::invalid_argument("csv scenario: unknown design id '" + id +
                                      "' in mu override");
        }
        mu[static_cast<std::size_t>(it - order.begin())] = prob.get<double>();
      }
      if (spec.mu_override.size() != static_cast<std::size_t>(m)) {
        throw std::invalid_argument(
            "csv scenario: mu override must cover every design");
      }
    } else {
      throw std::invalid_argument("csv scenario: mu override must be array or map");
    }
  }

  Polytope poly = [&]() {
    if (spec.poly_spec.contains("kind") &&
        spec.poly_spec.at("kind") == "simplex") {
      return simplex_polytope(spec.poly_spec.at("dim").get<int>());
    }
    return Polytope::from_json(spec.poly_spec);
  }();
  if (poly.dimension() != d) {
    throw std::invalid_argument("csv scenario: polytope dimension != label dim");
  }

  Scenario scenario{make_design_pool(order, mu),
                    std::move(poly),
                    HypothesisClass{},
                    0.0,
                    nullptr,
                    {},
                    {},
                    {}};
  scenario.support.resize(static_cast<std::size_t>(m));
  scenario.conditional_means.resize(static_cast<std::size_t>(m));
  scenario.conditional_sq_norms.resize(static_cast<std::size_t>(m));
  std::vector<std::vector<Vec>> by_design;
  for (int i = 0; i < m; ++i) {
    const std::vector<Vec>& recs = records[order[static_cast<std::size_t>(i)]];
    Vec mean(static_cast<std::size_t>(d), 0.0);
    double sq = 0.0;
    for (const Vec& r : recs) {
      scenario.rho_c = std::max(scenario.rho_c, norm(r));
      sq += squared_norm(r);
      for (int c = 0; c < d; ++c) mean[static_cast<std::size_t>(c)] += r[static_cast<std::size_t>(c)];
      scenario.support[static_cast<std::size_t>(i)].push_back(
          SupportPoint{1.0 / static_cast<double>(recs.size()), r});
    }
    for (double& v : mean) v /= static_cast<double>(recs.size());
    scenario.conditional_means[static_cast<std::size_t>(i)] = mean;
    scenario.conditional_sq_norms[static_cast<std::size_t>(i)] =
        sq / static_cast<double>(recs.size());
    by_design.push_back(recs);
  }
  scenario.label_oracle = [by_design](int design, Rng& rng) {
    const std::vector<Vec>& recs = by_design[static_cast<std::size_t>(design)];
    const std::size_t idx = static_cast<std::size_t>(
        uniform01(rng) * static_cast<double>(recs.size()));
    return recs[std::min(idx, recs.size() - 1)];
  };

  attach_class(scenario, spec.class_spec, spec.seed);
  return scenario;
}

namespace {

HypothesisClass mirrored_class(const nlohmann::json& spec, const Scenario& base) {
  if (base.poly.dimension() != 2) {
    throw std::invalid_argument("mirrored class: needs a 2-dimensional label space");
  }
  const int m = base.pool.size();
  std::vector<int> flips = spec.value("flip_designs", std::vector<int>{});
  if (flips.empty()) {
    throw std::invalid_argument("mirrored class: flip_designs is required");
  }
  for (int f : flips) {
    if (f < 0 || f >= m) {
      throw std::invalid_argument("mirrored class: flip design out of range");
    }
  }
  const double far_scale = spec.value("far_scale", 2.0);
  const double mean_scale = spec.value("mean_scale", 1.5);

  std::vector<bool> is_flip(static_cast<std::size_t>(m), false);
  for (int f : flips) is_flip[static_cast<std::size_t>(f)] = true;

  Hypothesis near_safe{"near_safe", {}};
  Hypothesis near_flip{"near_flip", {}};
  Hypothesis far_safe{"far_safe", {}};
  Hypothesis far_flip{"far_flip", {}};
  Hypothesis scaled_mean{"scaled_mean", {}};
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < m; ++i) {
    const Vec& mean = base.conditional_means[static_cast<std::size_t>(i)];
    const double gap = mean[0] - mean[1];
    if (std::abs(gap) <= 1e-9) {
      throw std::invalid_argument(
          "mirrored class: a conditional mean sits on the decision boundary");
    }
    const double side = gap > 0.0 ? 1.0 : -1.0;
    // Unit step deeper into the mean's own cone; the swap reflects across
    // the boundary with the same displacement norm.
    const Vec inward{side * inv_sqrt2, -side * inv_sqrt2};
    const double s = std::sqrt(2.0) * std::abs(gap);
    const Vec swap{mean[1], mean[0]};
    const Vec deeper = add(mean, scaled(inward, s));
    const Vec far_deeper = add(mean, scaled(inward, far_scale * s));
    const Vec far_swapped = add(swap, scaled(inward, -(far_scale - 1.0) * s));

    near_safe.predictions.push_back(is_flip[static_cast<std::size_t>(i)] ? deeper : mean);
    near_flip.predictions.push_back(is_flip[static_cast<std::size_t>(i)] ? swap : mean);
    far_safe.predictions.push_back(far_deeper);
    far_flip.predictions.push_back(far_swapped);
    scaled_mean.predictions.push_back(scaled(mean, mean_scale));
  }
  return make_hypothesis_class(
      {near_safe, near_flip, far_safe, far_flip, scaled_mean});
}

HypothesisClass empirical_mean_class(const nlohmann::json& spec,
                                     const Scenario& base, std::uint64_t seed) {
  const std::vector<int> sizes = spec.at("sizes").get<std::vector<int>>();
  if (sizes.empty()) {
    throw std::invalid_argument("empirical_mean class: sizes must be nonempty");
  }
  std::vector<Hypothesis> members;
  for (std::size_t mem = 0; mem < sizes.size(); ++mem) {
    const int n = sizes[mem];
    if (n < 1) throw std::invalid_argument("empirical_mean class: size must be >= 1");
    Hypothesis h{"n" + std::to_string(n), {}};
    for (int i = 0; i < base.pool.size(); ++i) {
      Rng rng = make_rng(derive_seed(derive_seed(seed, 0xc1a55eedull + mem),
                                     static_cast<std::uint64_t>(i)));
      Vec mean(static_cast<std::size_t>(base.poly.dimension()), 0.0);
      for (int k = 0; k < n; ++k) {
        const Vec label = base.draw_label(i, rng);
        for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += label[c];
      }
      for (double& v : mean) v /= static_cast<double>(n);
      h.predictions.push_back(std::move(mean));
    }
    members.push_back(std::move(h));
  }
  return make_hypothesis_class(std::move(members));
}

}  // namespace

HypothesisClass build_hypothesis_class(const nlohmann::json& spec,
                                       const Scenario& base,
                                       std::uint64_t seed) {
  if (spec.is_null() || spec.empty()) {
    throw std::invalid_argument("class spec: missing");
  }
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "explicit") {
    return HypothesisClass::from_json(spec);
  }
  if (kind == "file") {
    std::ifstream in(spec.at("path").get<std::string>());
    if (!in) {
      throw std::invalid_argument("class spec: cannot open " +
                                  spec.at("path").get<std::string>());
    }
    nlohmann::json j;
    in >> j;
    return HypothesisClass::from_json(j);
  }
  if (kind == "empirical_mean") return empirical_mean_class(spec, base, seed);
  if (kind == "mirrored") return mirrored_class(spec, base);
  throw std::invalid_argument("class spec: unknown kind '" + kind + "'");
}

Scenario scenario_from_json(const nlohmann::json& config) {
  const std::string kind = config.at("kind").get<std::string>();
  const std::uint64_t seed = config.value("seed", 1);
  if (kind == "cost_sensitive") {
    CostSensitiveSpec spec;
    if (config.contains("cost_matrix")) {
      for (const auto& row : config.at("cost_matrix")) spec.cost_matrix.push_back(row.get<Vec>());
    } else {
      spec.cost_matrix = cost_ratio_matrix(config.at("cost_ratio").get<double>());
    }
    spec.positive_rates = config.value("positive_rates", Vec{});
    if (config.contains("class_probs")) {
      for (const auto& row : config.at("class_probs")) spec.class_probs.push_back(row.get<Vec>());
    }
    spec.mu = config.value("mu", Vec{});
    spec.class_spec = config.value("class", nlohmann::json());
    spec.seed = seed;
    return cost_sensitive_scenario(spec);
  }
  if (kind == "assignment") {
    AssignmentSpec spec;
    spec.tasks = config.value("tasks", 5);
    spec.models = config.value("models", 4);
    spec.capacities = config.value("capacities", std::vector<int>{1, 2, 2, 2});
    spec.demand = config.value("demand", 1);
    if (config.contains("score_means")) {
      for (const auto& row : config.at("score_means")) spec.score_means.push_back(row.get<Vec>());
    }
    spec.noise_sigma = config.value("noise_sigma", 0.5);
    spec.mu = config.value("mu", Vec{});
    if (config.contains("joint_capacities")) {
      for (const auto& j : config.at("joint_capacities")) {
        spec.joint_capacities.push_back(JointCapacity{
            j.at("models").get<std::vector<int>>(), j.at("limit").get<int>()});
      }
    }
    spec.class_spec = config.value("class", nlohmann::json());
    spec.seed = seed;
    return assignment_scenario(spec);
  }
  if (kind == "counterexample") {
    std::optional<double> rotation;
    if (config.contains("mean_rotation")) {
      rotation = config.at("mean_rotation").get<double>();
    }
    return counterexample_scenario(config.value("half_angle", 0.698),
                                   config.value("mean_norm", 2.0),
                                   config.value("noise_sigma", 0.1), rotation);
  }
  if (kind == "normalization_example") {
    return normalization_example_scenario(config.value("noise_sigma", 0.5));
  }
  if (kind == "csv") {
    CsvScenarioSpec spec;
    spec.path = config.at("path").get<std::string>();
    spec.poly_spec = config.at("poly");
    spec.class_spec = config.at("class");
    spec.mu_override = config.value("mu", nlohmann::json());
    spec.seed = seed;
    return csv_empirical_scenario(spec);
  }
  throw std::invalid_argument("scenario: unknown kind '" + kind + "'");
}

ConditionReport verify_conditions(const Scenario& scenario) {
  if (!scenario.has_conditional_means()) {
    throw std::invalid_argument("verify_conditions: conditional means required");
  }
  const HypothesisClass& cls = scenario.hypotheses;
  const DesignPool& pool = scenario.pool;
  const Polytope& poly = scenario.poly;
  ConditionReport report;
  report.optimal = optimal_members(cls, scenario);
  report.eta = eta_margin(cls, pool, poly);

  // Condition 1: one member reproduces the conditional-mean decisions at
  // every design.
  std::vector<int> mean_decisions;
  for (int i = 0; i < pool.size(); ++i) {
    mean_decisions.push_back(
        linear_oracle(poly, scenario.conditional_means[static_cast<std::size_t>(i)])
            .vertex_index);
  }
  for (const Hypothesis& h : cls.members) {
    bool match = true;
    for (int i = 0; i < pool.size(); ++i) {
      if (linear_oracle(poly, h.at(i)).vertex_index !=
          mean_decisions[static_cast<std::size_t>(i)]) {
        match = false;
        break;
      }
    }
    if (match) {
      report.condition1 = true;
      break;
    }
  }

  report.delta_pert = safe_perturbation_bound(cls, report.optimal, pool, poly);

  std::vector<bool> is_opt(static_cast<std::size_t>(cls.size()), false);
  for (int i : report.optimal) is_opt[static_cast<std::size_t>(i)] = true;
  for (int i = 0; i < pool.size(); ++i) {
    const double mu = pool.mu[static_cast<std::size_t>(i)];
    if (!(mu > 0.0)) continue;
    bool separated = true;
    for (int sub = 0; sub < cls.size() && separated; ++sub) {
      if (is_opt[static_cast<std::size_t>(sub)]) continue;
      for (int opt : report.optimal) {
        if (!(directional_difference(cls.member(sub), cls.member(opt), i) >
              report.delta_pert)) {
          separated = false;
          break;
        }
      }
    }
    if (separated && mu > report.mu_lb) {
      report.condition2 = true;
      report.mu_lb = mu;
      report.witness_design = i;
    }
  }

  report.c_lb = std::numeric_limits<double>::infinity();
  for (const Vec& mean : scenario.conditional_means) {
    report.c_lb = std::min(report.c_lb, norm(mean));
  }
  report.gamma_lb = min_vertex_gap(poly);
  report.condition3 = report.c_lb > 0.0 && report.gamma_lb > 0.0;
  return report;
}

double percentage_spo_risk(const Hypothesis& h, const Hypothesis& reference,
                           const Scenario& scenario,
                           const std::vector<std::pair<int, Vec>>& testset) {
  double sum_h = 0.0;
  double sum_ref = 0.0;
  for (const auto& [design, label] : testset) {
    sum_h += spo_loss(scenario.poly, h.at(design), label);
    sum_ref += spo_loss(scenario.poly, reference.at(design), label);
  }
  if (!(sum_ref > 0.0)) {
    throw std::invalid_argument(
        "percentage_spo_risk: reference loss sum is zero; metric undefined");
  }
  return (sum_h - sum_ref) / sum_ref;
}

double percentage_spo_risk_exact(const Hypothesis& h,
                                 const Hypothesis& reference,
                                 const Scenario& scenario) {
  if (!scenario.has_support()) {
    throw std::invalid_argument("percentage_spo_risk_exact: finite support required");
  }
  const double ref = risk_estimate(reference, scenario, 1, 0).value;
  if (!(ref > 0.0)) {
    throw std::invalid_argument(
        "percentage_spo_risk_exact: reference risk is zero; metric undefined");
  }
  const double val = risk_estimate(h, scenario, 1, 0).value;
  return (val - ref) / ref;
}

}  // namespace iwsd
