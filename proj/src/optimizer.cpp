// Copyright 2026 The gauss-certify Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gausscert/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "gausscert/errors.hpp"

namespace gausscert {

// ---------------------------------------------------------------------------
// Configuration.

void GaConfig::validate() const {
  if (population < 4) throw InputError("population must be at least 4");
  if (elitism < 0 || elitism >= population) throw InputError("elitism must be in [0, population)");
  if (max_generations < 0) throw InputError("max_generations must be nonnegative");
  if (stall_generations < 1) throw InputError("stall_generations must be positive");
  if (!(mutation_scale >= 0.0 && mutation_scale <= 1.0)) throw InputError("mutation_scale must be in [0, 1]");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) throw InputError("crossover_rate must be in [0, 1]");
}

nlohmann::json GaConfig::to_json() const {
  return {{"population", population},         {"max_generations", max_generations},
          {"stall_generations", stall_generations}, {"mutation_scale", mutation_scale},
          {"crossover_rate", crossover_rate}, {"elitism", elitism},
          {"seed", seed}};
}

GaConfig GaConfig::from_json(const nlohmann::json& doc, GaConfig base) {
  if (!doc.is_object()) throw InputError("GA config must be an object");
  auto get_int = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_number_integer()) throw InputError("GA config: " + key + " must be an integer");
    return v.get<long long>();
  };
  auto get_real = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_number()) throw InputError("GA config: " + key + " must be a number");
    return v.get<double>();
  };
  for (const auto& [key, value] : doc.items()) {
    if (key == "population") {
      base.population = static_cast<int>(get_int(value, key));
    } else if (key == "max_generations") {
      base.max_generations = static_cast<int>(get_int(value, key));
    } else if (key == "stall_generations") {
      base.stall_generations = static_cast<int>(get_int(value, key));
    } else if (key == "mutation_scale") {
      base.mutation_scale = get_real(value, key);
    } else if (key == "crossover_rate") {
      base.crossover_rate = get_real(value, key);
    } else if (key == "elitism") {
      base.elitism = static_cast<int>(get_int(value, key));
    } else if (key == "seed") {
      if (value.is_number_unsigned()) {
        base.seed = value.get<std::uint64_t>();
      } else {
        const auto s = get_int(value, key);
        if (s < 0) throw InputError("GA config: seed must be nonnegative");
        base.seed = static_cast<std::uint64_t>(s);
      }
    } else {
      throw InputError("GA config: unknown key '" + key + "'");
    }
  }
  base.validate();
  return base;
}

GaConfig GaConfig::from_json(const nlohmann::json& doc) { return from_json(doc, GaConfig{}); }

namespace {

// Flat `key = value` lines; enough TOML for a table of scalars.
nlohmann::json parse_flat_toml(const std::string& text) {
  nlohmann::json doc = nlohmann::json::object();
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("GA config line " + std::to_string(line_no) + ": expected key = value");
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      doc[key] = nlohmann::json::parse(value);
    } catch (const nlohmann::json::parse_error&) {
      throw InputError("GA config line " + std::to_string(line_no) + ": bad value '" + value + "'");
    }
  }
  return doc;
}

}  // namespace

GaConfig load_ga_config(const std::filesystem::path& path, bool* seed_set) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc;
  if (path.extension() == ".toml") {
    doc = parse_flat_toml(buf.str());
  } else {
    try {
      doc = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(path.string() + ": " + e.what());
    }
  }
  if (seed_set) *seed_set = doc.is_object() && doc.contains("seed");
  return GaConfig::from_json(doc);
}

// ---------------------------------------------------------------------------
// Genome.

namespace {

Matrix decode_block(const Matrix& lower) {
  const Eigen::Index n = lower.rows();
  Matrix m = lower * lower.transpose();
  const double eps = 1e-9 * m.trace() / static_cast<double>(n) + 1e-12;
  m.diagonal().array() += eps;
  return m;
}

Matrix cholesky_factor(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw ConditioningError("operator block has no Cholesky factor");
  return llt.matrixL();
}

}  // namespace

TestOperator Genome::decode() const { return TestOperator::create(decode_block(l_xx), decode_block(l_pp)); }

Genome Genome::encode(const TestOperator& op) {
  return Genome{cholesky_factor(op.m_xx()), cholesky_factor(op.m_pp())};
}

double Genome::norm() const { return std::sqrt(l_xx.squaredNorm() + l_pp.squaredNorm()); }

void Genome::normalize() {
  const double s = norm();
  if (s > 0.0) {
    l_xx /= s;
    l_pp /= s;
  }
}

// ---------------------------------------------------------------------------
// Seeds.

std::uint64_t partition_seed(std::uint64_t base_seed, const Partition& partition) {
  // splitmix64 finalizer folded over the canonical labels.
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(base_seed);
  h = mix(h ^ static_cast<std::uint64_t>(partition.size()));
  for (int label : partition.rgs()) h = mix(h ^ (static_cast<std::uint64_t>(label) + 1));
  return h;
}

namespace {

std::optional<Matrix> pd_inverse(const Matrix& c) {
  Eigen::LLT<Matrix> llt(c);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Matrix inv = symmetrized(llt.solve(Matrix::Identity(c.rows(), c.cols())));
  Eigen::SelfAdjointEigenSolver<Matrix> solver(inv);
  Vector eig = solver.eigenvalues();
  const double floor = 1e-9 * eig.maxCoeff();
  eig = eig.cwiseMax(floor);
  return Matrix(symmetrized(solver.eigenvectors() * eig.asDiagonal() * solver.eigenvectors().transpose()));
}

Matrix shifted(Matrix m) {
  m.diagonal().array() += 1e-9 * m.trace() / static_cast<double>(m.rows()) + 1e-12;
  return m;
}

Matrix rank_one_shifted(const Vector& v) { return shifted(0.5 * v * v.transpose()); }

}  // namespace

constexpr int kMaxSignPatternBlocks = 10;
constexpr std::size_t kMaxSignPatternSeeds = 12;

std::vector<TestOperator> default_seeds(const CovarianceState& state, const Partition& partition) {
  const int n = state.n_modes();
  if (partition.size() != n) throw InputError("partition size does not match state");
  std::vector<TestOperator> seeds{TestOperator::identity(n)};
  if (partition.num_blocks() < 2) return seeds;

  auto inv_xx = pd_inverse(state.c_xx());
  auto inv_pp = pd_inverse(state.c_pp());
  if (inv_xx && inv_pp) seeds.push_back(TestOperator::create(*inv_xx, *inv_pp));

  // Rank-one witnesses x.a, p.b with a block sign pattern S: the best pair for
  // fixed S is the top singular pair of C_xx^{-1/2} S C_pp^{-1/2}.
  if (inv_xx && inv_pp) {
    const Matrix root_inv_xx = psd_sqrt(*inv_xx, "C_xx^-1");
    const Matrix root_inv_pp = psd_sqrt(*inv_pp, "C_pp^-1");
    const int k = partition.num_blocks();
    const int patterns = k <= kMaxSignPatternBlocks ? 1 << (k - 1) : 0;
    std::vector<std::pair<double, TestOperator>> ranked;
    for (int mask = 0; mask < patterns; ++mask) {
      Vector signs(n);
      for (int j = 0; j < n; ++j) {
        const int block = partition.rgs()[j];
        signs(j) = block > 0 && ((mask >> (block - 1)) & 1) ? -1.0 : 1.0;
      }
      const Matrix w = root_inv_xx * signs.asDiagonal() * root_inv_pp;
      Eigen::JacobiSVD<Matrix> svd(w, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Vector a = root_inv_xx * svd.matrixU().col(0);
      const Vector b = root_inv_pp * svd.matrixV().col(0);
      const double top = svd.singularValues()(0);
      ranked.emplace_back(top, TestOperator::create(rank_one_shifted(a / std::sqrt(a.dot(state.c_xx() * a))),
                                                    rank_one_shifted(b / std::sqrt(b.dot(state.c_pp() * b)))));
      // Every singular value above the vacuum level 2 lowers <L> - g_min;
      // use all of them with equal weight.
      int rank = 0;
      while (rank < n && svd.singularValues()(rank) > 2.0) ++rank;
      if (rank > 1) {
        const Matrix us = root_inv_xx * svd.matrixU().leftCols(rank);
        const Matrix vs = root_inv_pp * svd.matrixV().leftCols(rank);
        ranked.emplace_back(top, TestOperator::create(shifted(us * us.transpose()), shifted(vs * vs.transpose())));
      }
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });
    for (std::size_t i = 0; i < ranked.size() && i < kMaxSignPatternSeeds; ++i) seeds.push_back(ranked[i].second);
  }

  const auto& blocks = partition.blocks();
  for (std::size_t a = 0; a < blocks.size(); ++a) {
    for (std::size_t b = a + 1; b < blocks.size(); ++b) {
      Vector u = Vector::Zero(n);
      Vector v = Vector::Zero(n);
      for (int j : blocks[a]) u(j) = 1.0 / std::sqrt(static_cast<double>(blocks[a].size()));
      for (int j : blocks[b]) v(j) = 1.0 / std::sqrt(static_cast<double>(blocks[b].size()));
      const Matrix diff = rank_one_shifted(u - v);
      const Matrix sum = rank_one_shifted(u + v);
      seeds.push_back(TestOperator::create(diff, sum));
      seeds.push_back(TestOperator::create(sum, diff));
    }
  }
  return seeds;
}

// ---------------------------------------------------------------------------
// Genetic algorithm.

namespace {

struct Individual {
  Genome genome;
  double fitness = std::numeric_limits<double>::infinity();
};

class WitnessSearch {
 public:
  WitnessSearch(const CovarianceState& state, const Partition& partition, const GaConfig& config,
                double added_noise, std::uint64_t seed)
      : state_(state), partition_(partition), config_(config), added_noise_(added_noise), rng_(seed) {}

  double evaluate(const TestOperator& op) {
    ++evaluations_;
    try {
      WitnessResult r = significance(op, state_, partition_, added_noise_);
      const double f = r.significance;
      if (!incumbent_ || f < incumbent_->first.significance) incumbent_.emplace(std::move(r), op);
      return f;
    } catch (const ConditioningError&) {
      return std::numeric_limits<double>::infinity();
    }
  }

  double evaluate(const Genome& g) {
    try {
      return evaluate(g.decode());
    } catch (const InputError&) {
      ++evaluations_;
      return std::numeric_limits<double>::infinity();
    }
  }

  Genome random_genome() {
    const int n = state_.n_modes();
    Genome g{Matrix::Zero(n, n), Matrix::Zero(n, n)};
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) {
        g.l_xx(i, j) = normal_(rng_);
        g.l_pp(i, j) = normal_(rng_);
      }
    }
    g.normalize();
    return g;
  }

  // Half the time an isotropic step on every factor entry, otherwise a
  // larger step on a single entry (lets factors collapse towards low rank).
  void mutate(Genome& g, double scale) {
    const int n = state_.n_modes();
    if (coin_(rng_)) {
      const double sd = scale / std::sqrt(static_cast<double>(n * (n + 1)));
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
          g.l_xx(i, j) += sd * normal_(rng_);
          g.l_pp(i, j) += sd * normal_(rng_);
        }
      }
    } else {
      const int i = std::uniform_int_distribution<int>(0, n - 1)(rng_);
      const int j = std::uniform_int_distribution<int>(0, i)(rng_);
      Matrix& block = coin_(rng_) ? g.l_xx : g.l_pp;
      block(i, j) += scale * normal_(rng_) / std::sqrt(2.0);
    }
    g.normalize();
  }

  const Individual& tournament(const std::vector<Individual>& pop) {
    std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
    const Individual* best = &pop[pick(rng_)];
    for (int t = 1; t < 3; ++t) {
      const Individual* other = &pop[pick(rng_)];
      if (other->fitness < best->fitness) best = other;
    }
    return *best;
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  long evaluations() const { return evaluations_; }
  const std::optional<std::pair<WitnessResult, TestOperator>>& incumbent() const { return incumbent_; }

 private:
  const CovarianceState& state_;
  const Partition& partition_;
  const GaConfig& config_;
  double added_noise_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::bernoulli_distribution coin_{0.5};
  long evaluations_ = 0;
  std::optional<std::pair<WitnessResult, TestOperator>> incumbent_;
};

bool by_fitness(const Individual& a, const Individual& b) { return a.fitness < b.fitness; }

}  // namespace

OptimizationOutcome optimize_witness(const CovarianceState& state, const Partition& partition,
                                     const GaConfig& config, double added_noise,
                                     std::span<const TestOperator> extra_seeds) {
  config.validate();
  if (partition.size() != state.n_modes()) {
    throw InputError("partition covers " + std::to_string(partition.size()) + " modes but state has " +
                     std::to_string(state.n_modes()));
  }
  const std::uint64_t seed = partition_seed(config.seed, partition);
  WitnessSearch search(state, partition, config, added_noise, seed);

  std::vector<TestOperator> seeds = default_seeds(state, partition);
  seeds.insert(seeds.end(), extra_seeds.begin(), extra_seeds.end());

  // Seeds are scored exactly as given; their genomes join the population.
  std::vector<Individual> population;
  population.reserve(config.population);
  for (const auto& op : seeds) {
    search.evaluate(op);
    if (static_cast<int>(population.size()) < config.population) {
      Individual ind{Genome::encode(op)};
      ind.genome.normalize();
      ind.fitness = search.evaluate(ind.genome);
      population.push_back(std::move(ind));
    }
  }
  const std::size_t n_seed_genomes = population.size();
  while (static_cast<int>(population.size()) < config.population) {
    Individual ind;
    if (population.size() % 2 == 1 && n_seed_genomes > 0) {
      ind.genome = population[(population.size() / 2) % n_seed_genomes].genome;
      search.mutate(ind.genome, config.mutation_scale);
    } else {
      ind.genome = search.random_genome();
    }
    ind.fitness = search.evaluate(ind.genome);
    population.push_back(std::move(ind));
  }
  std::stable_sort(population.begin(), population.end(), by_fitness);

  OptimizationOutcome out;
  out.seed_used = seed;
  out.initial_best = search.incumbent() ? search.incumbent()->first.significance
                                        : std::numeric_limits<double>::infinity();

  double scale = config.mutation_scale;
  double reference = out.initial_best;
  double previous = out.initial_best;
  int stall = 0;
  int generation = 0;
  for (; generation < config.max_generations && stall < config.stall_generations; ++generation) {
    std::vector<Individual> next(population.begin(), population.begin() + config.elitism);
    while (static_cast<int>(next.size()) < config.population) {
      Individual child{search.tournament(population).genome};
      if (search.uniform(0.0, 1.0) < config.crossover_rate) {
        const Genome& other = search.tournament(population).genome;
        const double wx = search.uniform(0.25, 0.75);
        const double wp = search.uniform(0.25, 0.75);
        child.genome.l_xx = wx * child.genome.l_xx + (1.0 - wx) * other.l_xx;
        child.genome.l_pp = wp * child.genome.l_pp + (1.0 - wp) * other.l_pp;
      }
      search.mutate(child.genome, scale);
      child.fitness = search.evaluate(child.genome);
      next.push_back(std::move(child));
    }
    std::stable_sort(next.begin(), next.end(), by_fitness);
    population = std::move(next);

    // Step size follows any improvement; termination needs a relative gain.
    const double best = search.incumbent()->first.significance;
    scale = best < previous ? std::min(1.0, scale * 1.3) : std::max(1e-6, scale * 0.7);
    previous = best;
    if (best < reference - 1e-6 * std::abs(reference)) {
      stall = 0;
      reference = best;
    } else {
      ++stall;
    }
    out.best_trace.push_back(best);
    out.population_best_trace.push_back(population.front().fitness);
  }

  out.generations_run = generation;
  out.evaluations = search.evaluations();
  if (!search.incumbent()) throw ConditioningError("no test operator could be evaluated");
  out.best_operator = search.incumbent()->second.normalized();
  out.best = significance(out.best_operator, state, partition, added_noise);
  return out;
}

}  // namespace gausscert
