#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "mrdpg/tensor.hpp"

namespace mrdpg {

using Rng = std::mt19937_64;

// splitmix64 finaliser; also the per-trial seed mixer.
std::uint64_t splitmix64(std::uint64_t x);
// Seed for Monte Carlo trial k: base ^ splitmix64(k).
std::uint64_t trial_seed(std::uint64_t base, std::uint64_t k);
Rng make_rng(std::uint64_t seed);

// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(Rng& rng);

struct WeightStack {
  int d = 0;
  std::vector<Matrix> layers;  // L matrices, each d x d

  std::size_t num_layers() const { return layers.size(); }
  void validate() const;
  // L x d^2, row l = (row 1 of W_l, ..., row d of W_l).
  Matrix q_matrix() const;
};

struct FixedLatent {
  Matrix x;  // n x d
};
struct DirichletLatent {
  Vector concentration;
};
// Each node is a standard basis vector e_c with c drawn from `probs`.
struct DiscreteLatent {
  Vector probs;
};
using LatentSpec = std::variant<FixedLatent, DirichletLatent, DiscreteLatent>;

void validate_latent(const LatentSpec& spec, int d, std::size_t n);
bool is_fixed(const LatentSpec& spec);
// n x d positions; consumes rng only for the random variants.
Matrix draw_latent(const LatentSpec& spec, int d, std::size_t n, Rng& rng);

struct ProbModel {
  LatentSpec latent_head;
  LatentSpec latent_tail;
  WeightStack weights;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  bool symmetric = false;

  void validate() const;
  std::size_t layers() const { return weights.num_layers(); }
};

// P(i, j, l) = x_i^T W_l y_j. Throws ModelError naming the first entry outside [0,1].
Tensor3 prob_tensor(const Matrix& x, const Matrix& y, const WeightStack& w);

// Draws the latent positions (head once; tail reuses head when symmetric) and
// builds P. The symmetric flag is set only after checking P_{ij l} = P_{ji l}.
Tensor3 build_prob_tensor(const ProbModel& model, Rng& rng);

// Independent Bernoulli(P_ijl). With `symmetric`, entries with i <= j are drawn
// (layer by layer, row by row) and mirrored.
Tensor3 sample_adjacency(const Tensor3& p, bool symmetric, Rng& rng);

// Balanced contiguous communities: node i belongs to floor(i * k / n).
std::vector<int> even_communities(std::size_t n, int k);

// SBM model with one-hot latent positions and W_l = p2_l 11^T + (p1_l - p2_l) I.
ProbModel gen_sbm_model(std::size_t n, std::size_t L, int k, Rng& rng);
Tensor3 gen_sbm_prob(std::size_t n, std::size_t L, int k, Rng& rng);
// Same layer values with another community count.
ProbModel sbm_with_communities(const ProbModel& sbm, int k);

// W_l entries ~ U((L+l-1)/2L, (L+l)/2L), l = 1..L.
WeightStack gen_dirichlet_weights(int d, std::size_t L, Rng& rng);

struct DirichletDraw {
  ProbModel model;
  Tensor3 p;
};
// Directed by default: X and Y are drawn independently. `undirected` shares
// one draw X = Y (needs n1 == n2; tail_c is ignored) and samples symmetrically.
DirichletDraw gen_dirichlet_prob(std::size_t n1, std::size_t n2, int d, std::size_t L,
                                 const Vector& head_c, const Vector& tail_c, Rng& rng,
                                 bool undirected = false);

enum class ChangeKind {
  None,
  LayersFlipped,
  NodesPermuted,
  DimensionChanged,
  UnlabeledSBM,
  DirichletShift,
};

std::string to_string(ChangeKind kind);
ChangeKind parse_change_kind(const std::string& name);

struct ChangeScenario {
  ChangeKind kind = ChangeKind::None;
  std::size_t delta = 0;    // last pre-change time; ignored for None
  std::size_t horizon = 1;  // T
  int new_communities = 8;  // DimensionChanged
  Vector post_head;         // DirichletShift
  Vector post_tail;

  void validate() const;
};

// P with layer l replaced by layer L - l + 1.
Tensor3 flip_layers(const Tensor3& p);
// Q(i, j, l) = P(perm[i], perm[j], l).
Tensor3 permute_nodes(const Tensor3& p, const std::vector<std::size_t>& perm);
std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

/// Lazily generated A(1), ..., A(T).
///
/// Models whose latent specs are all Fixed use one pre-change tensor and one
/// post-change tensor for the whole run; random latent positions are redrawn
/// at every t. The change happens after time delta: A(delta + 1) is the first
/// post-change draw.
class DynamicStream {
 public:
  DynamicStream(ChangeScenario scenario, ProbModel base, std::uint64_t seed);

  std::size_t horizon() const { return scenario_.horizon; }
  std::size_t time() const { return t_; }
  bool done() const { return t_ >= scenario_.horizon; }
  std::optional<std::size_t> change_point() const;
  const ChangeScenario& scenario() const { return scenario_; }
  Dims3 dims() const;

  Tensor3 next();
  // Probability tensor behind the most recent draw.
  const Tensor3& last_probability() const { return last_p_; }

 private:
  Tensor3 probability_at(std::size_t t);

  ChangeScenario scenario_;
  ProbModel pre_;
  ProbModel post_;
  bool fixed_ = false;
  Tensor3 p_pre_;
  Tensor3 p_post_;
  Tensor3 last_p_;
  std::vector<std::size_t> perm_;  // NodesPermuted
  Rng rng_;
  std::size_t t_ = 0;
};

// Convenience: all T tensors at once.
std::vector<Tensor3> gen_dynamic_stream(const ChangeScenario& scenario, const ProbModel& base,
                                        std::uint64_t seed);

}  // namespace mrdpg
