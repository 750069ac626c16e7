#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "mcn/model.hpp"
#include "mcn/subspace.hpp"

namespace mcn {

/// Which relay graph a failed link belongs to.
enum class GraphSide { Actuation, Measurement };
std::string to_string(GraphSide side);

/// Reference to one link of the network, tagged with its graph.
struct EdgeRef {
  GraphSide side = GraphSide::Actuation;
  std::string from;
  std::string to;

  friend bool operator==(const EdgeRef& a, const EdgeRef& b) {
    return a.side == b.side && a.from == b.from && a.to == b.to;
  }
  friend bool operator<(const EdgeRef& a, const EdgeRef& b) {
    return std::tie(a.side, a.from, a.to) < std::tie(b.side, b.from, b.to);
  }
};
std::string to_string(const EdgeRef& e);

/// Node protocol on faulty links: replace missing data with zero, or keep
/// delivering the last value received before the failure.
enum class FailureProtocol { ZeroOut, HoldLast };
std::string to_string(FailureProtocol protocol);

/// A set of simultaneously failed links under one protocol.
struct FailureConfig {
  std::vector<EdgeRef> edges;
  FailureProtocol protocol = FailureProtocol::ZeroOut;
};

/// The frame-level perturbation a link-set failure introduces under the
/// zero-out protocol: (d_a, d_b) = (A - A^f, B - B^f), its image subspace
/// (what solvability conditions consume), and the nonnegative delay-profile
/// drops on each side, padded to the nominal maximum delays.
struct FailureSignature {
  Eigen::MatrixXd d_a;         // n x n
  Eigen::MatrixXd d_b;         // n x 1
  Subspace image;              // span([d_a | d_b])
  Eigen::RowVectorXd delta_r;  // 1 x D_R
  Eigen::MatrixXd delta_o;     // n_S x D_O
};

/// Zero-out faulty model: delay profiles recomputed with f's edges removed,
/// padded to the nominal maximum delays, realized and reassembled. Returns
/// (A^f, B^f). Edges must exist in their declared graphs.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> faulty_realization(
    const McnModel& model, const FailureConfig& f);

/// Signature of one failure configuration (zero-out). Asserts the row
/// structure (perturbations confined to the terminating-output rows and the
/// actuation-chain head row) as an internal invariant.
FailureSignature failure_signature(const McnModel& model,
                                   const FailureConfig& f,
                                   const ToleranceConfig& tol = {});

/// One equivalence class of link sets: every member produces the identical
/// perturbation. The class of the empty set (zero signature) is always
/// present and always first.
struct FailureClass {
  std::vector<EdgeRef> representative;
  FailureSignature signature;
  std::vector<std::vector<EdgeRef>> members;
  bool in_sigma = false;  // perturbation equals a sum of other classes

  bool is_zero_class() const { return representative.empty(); }
};

/// Structural regime of the network, by hop count of the two relay graphs.
enum class McnCase {
  GRmultiGOsingle,
  GRsingleGOmulti,
  BothMulti,
  BothSingle,
};
std::string to_string(McnCase c);
McnCase detect_case(const McnModel& model);

struct EnumerationOptions {
  /// Only link sets with at most this many edges; unset = exhaustive.
  std::optional<int> max_cardinality;
  /// Componentwise tolerance for grouping and subset-sum over profiles.
  double signature_tol = 1e-9;
};

/// All equivalence classes over the enumerated link sets, with the
/// sum-expressible ones flagged. The distinguished class set consists of
/// the entries with in_sigma == false (the zero class is always one).
struct FailureClassSet {
  std::vector<FailureClass> omega;  // zero class first
  McnCase mcn_case = McnCase::BothSingle;
  std::vector<GraphSide> enumerated_sides;
  bool exhaustive = true;

  /// Indices into omega of the distinguished classes (in_sigma == false).
  std::vector<std::size_t> phi_indices() const;
  /// Indices of distinguished classes with a nonzero signature.
  std::vector<std::size_t> phi_nonzero_indices() const;
  /// Sum over distinguished nonzero classes of the signature image
  /// dimension.
  Eigen::Index n_phi() const;
};

/// Enumerates link subsets of the case-relevant graph side(s), groups them
/// by perturbation equality, and flags sum-expressible classes. Scope:
/// multi-hop actuation with single-hop measurement enumerates actuation
/// links; any single-hop-actuation regime enumerates measurement links;
/// both-multi-hop enumerates each side separately (no mixed sets).
/// Exhaustive mode requires at most 16 links on each enumerated side.
FailureClassSet enumerate_failure_classes(const McnModel& model,
                                          const EnumerationOptions& opts = {},
                                          const ToleranceConfig& tol = {});

/// Detectability verdicts and the structural cross-checks behind them.
struct DetectabilityReport {
  McnCase mcn_case = McnCase::BothSingle;
  FailureClassSet classes;
  /// Solvability per omega entry: set for distinguished nonzero classes,
  /// unset for the zero class and sum-expressible classes.
  std::vector<std::optional<bool>> solvable;
  TreeDiagnosis tree;  // of the measurement graph
  Eigen::Index n_s = 0;
  Eigen::Index n_phi = 0;
  Eigen::Index d_l_phi = 0;  // dimension of the juxtaposed signature image
  bool all_solvable = false;
  bool structural_prediction = false;  // topology-level forecast of the above
  bool internal_inconsistency = false;
  std::vector<std::string> annotations;
  std::string recommendation;
};

/// Runs enumeration, the per-class solvability check, and the structural
/// predictions, cross-checking that structure and subspace algebra agree.
/// Disagreements that the theory rules out are flagged as
/// internal_inconsistency (tolerance breakdown), never silently dropped.
DetectabilityReport classify_detectability(const McnModel& model,
                                           const EnumerationOptions& opts = {},
                                           const ToleranceConfig& tol = {});

/// One residual generator: a deadbeat observer on the factor space of the
/// unobservability subspace of all other classes. Decoupled exactly from
/// every other distinguished class; sensitive to its own.
struct ResidualGenerator {
  std::size_t class_index = 0;  // into FailureClassSet::omega
  std::string label;
  Eigen::MatrixXd f;    // q x q state map, nilpotent
  Eigen::MatrixXd g_u;  // q x 1 input injection
  Eigen::MatrixXd g_y;  // q x n_S output injection
  Eigen::MatrixXd h;    // r x n_S output projection
  Eigen::MatrixXd c_t;  // r x q residual read-out
  Eigen::Index settle_frames = 0;  // residual is exactly 0 after this many
                                   // failure-free frames
};

struct ResidualBank {
  std::vector<ResidualGenerator> generators;
  Eigen::Index n = 0;           // ambient state dimension
  Eigen::Index max_settle = 0;  // max over generators of settle_frames
};

/// Builds one generator per distinguished nonzero class. Precondition:
/// every such class solvable (tree-type regime); violations raise
/// ValidationError naming the structural reason. Numerical failures to
/// reach a nilpotent closed loop raise NumericalError.
ResidualBank synthesize_residual_bank(const McnModel& model,
                                      const FailureClassSet& classes,
                                      const ToleranceConfig& tol = {});

/// Residual magnitudes per frame: element (k, i) is the max-norm of
/// generator i's residual at frame k. y is frames x n_S; u has one entry
/// per frame.
Eigen::MatrixXd bank_residuals(const ResidualBank& bank,
                               const Eigen::MatrixXd& y,
                               const std::vector<double>& u);

struct DetectorConfig {
  double threshold = 1e-6;
  int persistence = 3;
};

struct DetectionResult {
  Eigen::MatrixXd residuals;  // frames x generators, magnitudes
  /// Per frame: indices into bank.generators reported active.
  std::vector<std::vector<std::size_t>> detected;
};

/// Persistence detector: generator i is active at frame k iff its residual
/// magnitude exceeds the threshold on every frame of the window
/// [k-persistence+1, k] and the window lies entirely past the settling
/// transient (frame >= bank.n). The trace must outlast the transient.
DetectionResult run_detector(const ResidualBank& bank,
                             const Eigen::MatrixXd& y,
                             const std::vector<double>& u,
                             const DetectorConfig& config = {});

}  // namespace mcn
