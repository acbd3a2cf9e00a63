#include "mrdpg/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mrdpg/error.hpp"

namespace mrdpg {

namespace {

// Rounding slack for products of simplex vectors with weights at the boundary.
constexpr double kProbSlack = 1e-12;

std::string index_string(std::size_t i, std::size_t j, std::size_t l) {
  return "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "," + std::to_string(l + 1) +
         ")";
}

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

Matrix one_hot(const std::vector<int>& labels, int k) {
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), k);
  for (std::size_t i = 0; i < labels.size(); ++i) x(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  return x;
}

Tensor3 reflag(Tensor3 out, const Tensor3& like) {
  if (like.is_probability()) out.mark_probability();
  if (like.is_symmetric()) out.mark_symmetric();
  return out;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t base, std::uint64_t k) { return base ^ splitmix64(k); }

Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void WeightStack::validate() const {
  if (d < 1) throw ConfigError("weight stack: latent dimension must be positive");
  if (layers.empty()) throw ConfigError("weight stack: no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].rows() != d || layers[l].cols() != d) {
      throw ConfigError("weight stack: layer " + std::to_string(l + 1) + " is not d x d");
    }
    if (!layers[l].allFinite()) {
      throw ConfigError("weight stack: layer " + std::to_string(l + 1) + " has non-finite entries");
    }
  }
}

Matrix WeightStack::q_matrix() const {
  validate();
  Matrix q(static_cast<Eigen::Index>(layers.size()), d * d);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) q(static_cast<Eigen::Index>(l), a * d + b) = layers[l](a, b);
  }
  return q;
}

void validate_latent(const LatentSpec& spec, int d, std::size_t n) {
  if (const auto* f = std::get_if<FixedLatent>(&spec)) {
    if (f->x.rows() != static_cast<Eigen::Index>(n) || f->x.cols() != d) {
      throw ConfigError("fixed latent positions must be n x d");
    }
    if (!f->x.allFinite()) throw ConfigError("fixed latent positions must be finite");
  } else if (const auto* c = std::get_if<DirichletLatent>(&spec)) {
    if (c->concentration.size() != d) throw ConfigError("Dirichlet concentration must have length d");
    if (!(c->concentration.array() > 0.0).all() || !c->concentration.allFinite()) {
      throw ConfigError("Dirichlet concentrations must be positive and finite");
    }
  } else {
    const auto& p = std::get<DiscreteLatent>(spec).probs;
    if (p.size() != d) throw ConfigError("membership probabilities must have length d");
    if ((p.array() < 0.0).any() || std::abs(p.sum() - 1.0) > 1e-9) {
      throw ConfigError("membership probabilities must be nonnegative and sum to 1");
    }
  }
}

bool is_fixed(const LatentSpec& spec) { return std::holds_alternative<FixedLatent>(spec); }

Matrix draw_latent(const LatentSpec& spec, int d, std::size_t n, Rng& rng) {
  validate_latent(spec, d, n);
  if (const auto* f = std::get_if<FixedLatent>(&spec)) return f->x;
  Matrix x(static_cast<Eigen::Index>(n), d);
  if (const auto* c = std::get_if<DirichletLatent>(&spec)) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double total = 0.0;
      for (int k = 0; k < d; ++k) {
        std::gamma_distribution<double> g(c->concentration(k), 1.0);
        x(i, k) = g(rng);
        total += x(i, k);
      }
      // Tiny concentrations can underflow every coordinate; fall back to a vertex.
      if (total <= 0.0) {
        x.row(i).setZero();
        x(i, static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(d))) = 1.0;
      } else {
        x.row(i) /= total;
      }
    }
    return x;
  }
  const auto& p = std::get<DiscreteLatent>(spec).probs;
  x.setZero();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double u = uniform01(rng);
    double acc = 0.0;
    int pick = d - 1;
    for (int k = 0; k < d; ++k) {
      acc += p(k);
      if (u < acc) {
        pick = k;
        break;
      }
    }
    x(i, pick) = 1.0;
  }
  return x;
}

void ProbModel::validate() const {
  weights.validate();
  if (n1 == 0 || n2 == 0) throw ConfigError("node counts must be positive");
  if (symmetric && n1 != n2) throw ConfigError("a symmetric model needs n1 == n2");
  validate_latent(latent_head, weights.d, n1);
  if (!symmetric) validate_latent(latent_tail, weights.d, n2);
}

Tensor3 prob_tensor(const Matrix& x, const Matrix& y, const WeightStack& w) {
  w.validate();
  if (x.cols() != w.d || y.cols() != w.d) throw ConfigError("latent dimension does not match weights");
  const auto n1 = static_cast<std::size_t>(x.rows());
  const auto n2 = static_cast<std::size_t>(y.rows());
  const std::size_t L = w.num_layers();
  Tensor3 p({n1, n2, L});
  for (std::size_t l = 0; l < L; ++l) {
    const Matrix layer = x * w.layers[l] * y.transpose();
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t j = 0; j < n2; ++j) {
        double v = layer(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (!(v >= -kProbSlack && v <= 1.0 + kProbSlack)) {
          throw ModelError("probability " + index_string(i, j, l) + " = " + std::to_string(v) +
                           " lies outside [0,1]");
        }
        p(i, j, l) = std::clamp(v, 0.0, 1.0);
      }
  }
  p.mark_probability();
  return p;
}

Tensor3 build_prob_tensor(const ProbModel& model, Rng& rng) {
  model.validate();
  const Matrix x = draw_latent(model.latent_head, model.weights.d, model.n1, rng);
  Tensor3 p = model.symmetric
                  ? prob_tensor(x, x, model.weights)
                  : prob_tensor(x, draw_latent(model.latent_tail, model.weights.d, model.n2, rng),
                                model.weights);
  if (model.symmetric) {
    try {
      p.mark_symmetric(1e-12);
    } catch (const ConfigError&) {
      // Non-symmetric W: sampling still mirrors the upper triangle.
    }
  }
  return p;
}

Tensor3 sample_adjacency(const Tensor3& p, bool symmetric, Rng& rng) {
  if (!p.is_probability()) throw ConfigError("sample_adjacency needs a probability tensor");
  const auto [n1, n2, L] = p.dims();
  if (symmetric && n1 != n2) throw ConfigError("symmetric sampling needs square layers");
  Tensor3 a(p.dims());
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t i = 0; i < n1; ++i) {
      for (std::size_t j = symmetric ? i : 0; j < n2; ++j) {
        const double v = uniform01(rng) < p(i, j, l) ? 1.0 : 0.0;
        a(i, j, l) = v;
        if (symmetric) a(j, i, l) = v;
      }
    }
  }
  a.mark_probability();
  if (symmetric) a.mark_symmetric();
  return a;
}

std::vector<int> even_communities(std::size_t n, int k) {
  if (k < 1) throw ConfigError("community count must be positive");
  if (n < static_cast<std::size_t>(k)) throw ConfigError("fewer nodes than communities");
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i * static_cast<std::size_t>(k) / n);
  return labels;
}

ProbModel gen_sbm_model(std::size_t n, std::size_t L, int k, Rng& rng) {
  if (L == 0) throw ConfigError("at least one layer is required");
  const auto labels = even_communities(n, k);
  ProbModel m;
  m.n1 = m.n2 = n;
  m.symmetric = true;
  m.weights.d = k;
  const double dl = static_cast<double>(L);
  for (std::size_t l = 1; l <= L; ++l) {
    const double li = static_cast<double>(l);
    const double p1 = uniform(rng, (3 * dl + li - 1) / (4 * dl), (3 * dl + li) / (4 * dl));
    const double p2 = uniform(rng, (2 * dl + li - 1) / (4 * dl), (2 * dl + li) / (4 * dl));
    Matrix w = Matrix::Constant(k, k, p2);
    w.diagonal().setConstant(p1);
    m.weights.layers.push_back(std::move(w));
  }
  m.latent_head = FixedLatent{one_hot(labels, k)};
  m.latent_tail = m.latent_head;
  return m;
}

Tensor3 gen_sbm_prob(std::size_t n, std::size_t L, int k, Rng& rng) {
  const ProbModel m = gen_sbm_model(n, L, k, rng);
  return build_prob_tensor(m, rng);
}

ProbModel sbm_with_communities(const ProbModel& sbm, int k) {
  if (!is_fixed(sbm.latent_head) || sbm.weights.d < 2) {
    throw ConfigError("dimension change needs a fixed-latent SBM with at least two communities");
  }
  ProbModel m = sbm;
  m.weights.d = k;
  for (auto& w : m.weights.layers) {
    const double p1 = w(0, 0);
    const double p2 = w(0, 1);
    w = Matrix::Constant(k, k, p2);
    w.diagonal().setConstant(p1);
  }
  m.latent_head = FixedLatent{one_hot(even_communities(sbm.n1, k), k)};
  m.latent_tail = m.latent_head;
  return m;
}

WeightStack gen_dirichlet_weights(int d, std::size_t L, Rng& rng) {
  if (d < 1 || L == 0) throw ConfigError("d and L must be positive");
  WeightStack w;
  w.d = d;
  const double dl = static_cast<double>(L);
  for (std::size_t l = 1; l <= L; ++l) {
    const double li = static_cast<double>(l);
    Matrix m(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) m(a, b) = uniform(rng, (dl + li - 1) / (2 * dl), (dl + li) / (2 * dl));
    w.layers.push_back(std::move(m));
  }
  return w;
}

DirichletDraw gen_dirichlet_prob(std::size_t n1, std::size_t n2, int d, std::size_t L,
                                 const Vector& head_c, const Vector& tail_c, Rng& rng,
                                 bool undirected) {
  if (undirected && n1 != n2) throw ConfigError("undirected model needs n1 == n2");
  DirichletDraw out;
  out.model.weights = gen_dirichlet_weights(d, L, rng);
  out.model.n1 = n1;
  out.model.n2 = n2;
  out.model.symmetric = undirected;
  out.model.latent_head = DirichletLatent{head_c};
  out.model.latent_tail = DirichletLatent{undirected ? head_c : tail_c};
  out.p = build_prob_tensor(out.model, rng);
  return out;
}

std::string to_string(ChangeKind kind) {
  switch (kind) {
    case ChangeKind::None: return "none";
    case ChangeKind::LayersFlipped: return "layers_flipped";
    case ChangeKind::NodesPermuted: return "nodes_permuted";
    case ChangeKind::DimensionChanged: return "dimension_changed";
    case ChangeKind::UnlabeledSBM: return "unlabeled_sbm";
    case ChangeKind::DirichletShift: return "dirichlet_shift";
  }
  return "none";
}

ChangeKind parse_change_kind(const std::string& name) {
  for (auto k : {ChangeKind::None, ChangeKind::LayersFlipped, ChangeKind::NodesPermuted,
                 ChangeKind::DimensionChanged, ChangeKind::UnlabeledSBM, ChangeKind::DirichletShift}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown change variant '" + name + "'");
}

void ChangeScenario::validate() const {
  if (horizon < 1) throw ConfigError("horizon T must be at least 1");
  if (kind != ChangeKind::None && (delta < 1 || delta >= horizon)) {
    throw ConfigError("change time must satisfy 1 <= delta < T");
  }
  if (kind == ChangeKind::DimensionChanged && new_communities < 1) {
    throw ConfigError("new community count must be positive");
  }
}

Tensor3 flip_layers(const Tensor3& p) {
  const auto [n1, n2, L] = p.dims();
  Tensor3 out(p.dims());
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j)
      for (std::size_t l = 0; l < L; ++l) out(i, j, l) = p(i, j, L - 1 - l);
  return reflag(std::move(out), p);
}

Tensor3 permute_nodes(const Tensor3& p, const std::vector<std::size_t>& perm) {
  const auto [n1, n2, L] = p.dims();
  if (n1 != n2 || perm.size() != n1) throw ConfigError("node permutation needs square layers of matching size");
  Tensor3 out(p.dims());
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j)
      for (std::size_t l = 0; l < L; ++l) out(i, j, l) = p(perm[i], perm[j], l);
  return reflag(std::move(out), p);
}

std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  // Fisher-Yates with our own bounded draw; std::shuffle is implementation-defined.
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(perm[i - 1], perm[std::min(j, i - 1)]);
  }
  return perm;
}

DynamicStream::DynamicStream(ChangeScenario scenario, ProbModel base, std::uint64_t seed)
    : scenario_(std::move(scenario)), pre_(std::move(base)), rng_(make_rng(seed)) {
  scenario_.validate();
  pre_.validate();
  post_ = pre_;
  switch (scenario_.kind) {
    case ChangeKind::DimensionChanged:
      post_ = sbm_with_communities(pre_, scenario_.new_communities);
      break;
    case ChangeKind::DirichletShift: {
      if (!std::holds_alternative<DirichletLatent>(pre_.latent_head)) {
        throw ConfigError("dirichlet_shift needs Dirichlet latent positions");
      }
      if (scenario_.post_head.size() == 0) throw ConfigError("dirichlet_shift needs post_head");
      post_.latent_head = DirichletLatent{scenario_.post_head};
      post_.latent_tail = DirichletLatent{
          pre_.symmetric || scenario_.post_tail.size() == 0 ? scenario_.post_head : scenario_.post_tail};
      post_.validate();
      break;
    }
    case ChangeKind::NodesPermuted:
    case ChangeKind::UnlabeledSBM:
      if (pre_.n1 != pre_.n2) throw ConfigError("node permutations need n1 == n2");
      break;
    default:
      break;
  }
  fixed_ = is_fixed(pre_.latent_head) && (pre_.symmetric || is_fixed(pre_.latent_tail));
  if (fixed_) {
    p_pre_ = build_prob_tensor(pre_, rng_);
    p_post_ = scenario_.kind == ChangeKind::DimensionChanged ? build_prob_tensor(post_, rng_) : p_pre_;
  }
  if (scenario_.kind == ChangeKind::NodesPermuted) perm_ = random_permutation(pre_.n1, rng_);
}

std::optional<std::size_t> DynamicStream::change_point() const {
  if (scenario_.kind == ChangeKind::None) return std::nullopt;
  return scenario_.delta;
}

Dims3 DynamicStream::dims() const { return {pre_.n1, pre_.n2, pre_.layers()}; }

Tensor3 DynamicStream::probability_at(std::size_t t) {
  const bool post = scenario_.kind != ChangeKind::None && t > scenario_.delta;
  Tensor3 p = fixed_ ? (post ? p_post_ : p_pre_) : build_prob_tensor(post ? post_ : pre_, rng_);
  if (post) {
    switch (scenario_.kind) {
      case ChangeKind::LayersFlipped:
      case ChangeKind::UnlabeledSBM:
        p = flip_layers(p);
        break;
      case ChangeKind::NodesPermuted:
        p = permute_nodes(p, perm_);
        break;
      default:
        break;
    }
  }
  if (scenario_.kind == ChangeKind::UnlabeledSBM) p = permute_nodes(p, random_permutation(pre_.n1, rng_));
  return p;
}

Tensor3 DynamicStream::next() {
  if (done()) throw ConfigError("stream exhausted");
  ++t_;
  last_p_ = probability_at(t_);
  return sample_adjacency(last_p_, pre_.symmetric, rng_);
}

std::vector<Tensor3> gen_dynamic_stream(const ChangeScenario& scenario, const ProbModel& base,
                                        std::uint64_t seed) {
  DynamicStream stream(scenario, base, seed);
  std::vector<Tensor3> out;
  out.reserve(stream.horizon());
  while (!stream.done()) out.push_back(stream.next());
  return out;
}

}  // namespace mrdpg
