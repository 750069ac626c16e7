#include "mcn/fdi.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>

#include "mcn/errors.hpp"
#include "mcn/flow.hpp"

namespace mcn {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

const ScheduledGraph& side_graph(const McnModel& model, GraphSide side) {
  return side == GraphSide::Actuation ? model.g_r : model.g_o;
}

/// Removes the referenced edges (validated to exist, no duplicates) from
/// copies of the two relay graphs.
std::pair<ScheduledGraph, ScheduledGraph> prune_graphs(
    const McnModel& model, const std::vector<EdgeRef>& edges) {
  auto sorted = edges;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ValidationError("failure configuration repeats a link");
  }
  ScheduledGraph g_r = model.g_r;
  ScheduledGraph g_o = model.g_o;
  for (const EdgeRef& ref : edges) {
    ScheduledGraph& g = ref.side == GraphSide::Actuation ? g_r : g_o;
    auto it = std::find_if(g.edges.begin(), g.edges.end(), [&](const Edge& e) {
      return e.from == ref.from && e.to == ref.to;
    });
    if (it == g.edges.end()) {
      throw ValidationError("failure configuration names a link absent from " +
                            to_string(ref.side) + " graph: " + to_string(ref));
    }
    g.edges.erase(it);
  }
  return {std::move(g_r), std::move(g_o)};
}

struct FaultyGammas {
  std::vector<double> r;                // length d_r
  std::vector<std::vector<double>> o;   // n_s entries, each length d_o
};

FaultyGammas faulty_gammas(const McnModel& model,
                           const std::vector<EdgeRef>& edges) {
  auto [g_r, g_o] = prune_graphs(model, edges);
  FaultyGammas fg;
  fg.r = compute_gamma_padded(g_r, g_r.sinks.front(), model.d_r);
  fg.o.reserve(g_o.sinks.size());
  for (const std::string& sink : g_o.sinks) {
    fg.o.push_back(compute_gamma_padded(g_o, sink, model.d_o));
  }
  return fg;
}

/// Scheduled source-to-sink routes of one graph side, each with a bitmask
/// over that side's declared edge list.
struct MaskedPath {
  std::uint32_t mask = 0;
  int delay = 1;
  double weight = 1.0;
  int sink_index = 0;
};

std::vector<MaskedPath> masked_paths(const ScheduledGraph& g) {
  std::map<std::pair<std::string, std::string>, int> index;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    index[{g.edges[i].from, g.edges[i].to}] = static_cast<int>(i);
  }
  std::vector<MaskedPath> out;
  for (std::size_t s = 0; s < g.sinks.size(); ++s) {
    for (const PathDelay& pd : enumerate_path_delays(g, g.sinks[s])) {
      MaskedPath mp;
      mp.delay = pd.delay;
      mp.weight = pd.weight;
      mp.sink_index = static_cast<int>(s);
      for (const Edge& e : pd.path) {
        mp.mask |= std::uint32_t{1} << index.at({e.from, e.to});
      }
      out.push_back(mp);
    }
  }
  return out;
}

bool has_multi_hop_route(const ScheduledGraph& g) {
  for (const std::string& sink : g.sinks) {
    for (const PathDelay& pd : enumerate_path_delays(g, sink)) {
      if (pd.path.size() >= 2) return true;
    }
  }
  return false;
}

/// True when every source-to-sink route crosses at least two links (the
/// strict multi-hop hypothesis) and at least one route exists.
bool strictly_multi_hop(const ScheduledGraph& g) {
  bool any = false;
  for (const std::string& sink : g.sinks) {
    for (const PathDelay& pd : enumerate_path_delays(g, sink)) {
      any = true;
      if (pd.path.size() < 2) return false;
    }
  }
  return any;
}

std::uint64_t subset_count(int n_edges, int max_card) {
  long double total = 0;
  long double binom = 1;  // C(n, 0)
  for (int j = 0; j <= std::min(n_edges, max_card); ++j) {
    if (j > 0) binom = binom * (n_edges - j + 1) / j;
    total += binom;
    if (total > 1e18) return UINT64_MAX;
  }
  return static_cast<std::uint64_t>(total);
}

/// Visits every nonempty edge subset up to max_card, smallest cardinality
/// first (lexicographic within one cardinality), so the first member found
/// of a class has minimal size.
void for_each_subset(int n_edges, int max_card,
                     const std::function<void(std::uint32_t)>& visit) {
  for (int card = 1; card <= max_card; ++card) {
    std::vector<int> idx(card);
    std::function<void(int, int)> comb = [&](int pos, int start) {
      if (pos == card) {
        std::uint32_t mask = 0;
        for (int p : idx) mask |= std::uint32_t{1} << p;
        visit(mask);
        return;
      }
      for (int i = start; i + (card - pos) <= n_edges; ++i) {
        idx[pos] = i;
        comb(pos + 1, i + 1);
      }
    };
    comb(0, 0);
  }
}

struct ClassDraft {
  VectorXd key;  // [delta_r | vec(delta_o rows)] stacked profile drop
  std::vector<EdgeRef> representative;
  std::vector<std::vector<EdgeRef>> members;
};

std::vector<EdgeRef> decode_mask(const ScheduledGraph& g, GraphSide side,
                                 std::uint32_t mask) {
  std::vector<EdgeRef> out;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    if (mask & (std::uint32_t{1} << i)) {
      out.push_back({side, g.edges[i].from, g.edges[i].to});
    }
  }
  return out;
}

/// Subset-sum search over nonnegative class keys: can `target` be written
/// as the sum of at least two distinct keys from `candidates`? Componentwise
/// nonnegativity prunes; a node budget keeps degenerate inputs honest.
bool sum_expressible(const VectorXd& target,
                     const std::vector<const VectorXd*>& candidates,
                     double tol) {
  std::uint64_t nodes = 0;
  constexpr std::uint64_t kNodeBudget = 5'000'000;
  std::function<bool(std::size_t, const VectorXd&, int)> rec =
      [&](std::size_t pos, const VectorXd& rest, int used) -> bool {
    if (++nodes > kNodeBudget) {
      throw BudgetError(
          "signature sum search exceeded its node budget; bound the subset "
          "cardinality");
    }
    if (rest.lpNorm<Eigen::Infinity>() <= tol * rest.size()) return used >= 2;
    if (pos == candidates.size()) return false;
    const VectorXd& cand = *candidates[pos];
    if ((rest - cand).minCoeff() >= -tol) {
      if (rec(pos + 1, rest - cand, used + 1)) return true;
    }
    return rec(pos + 1, rest, used);
  };
  return rec(0, target, 0);
}

MatrixXd stack_images(const MatrixXd& d_a, const MatrixXd& d_b) {
  MatrixXd m(d_a.rows(), d_a.cols() + d_b.cols());
  m << d_a, d_b;
  return m;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ", ";
    out += parts[i];
  }
  return out;
}

/// Declared nodes of g that sit on no scheduled source-to-sink route.
std::vector<std::string> inert_nodes(const ScheduledGraph& g) {
  std::vector<std::string> inert;
  std::map<std::string, bool> on_route;
  for (const std::string& node : g.nodes) on_route[node] = false;
  for (const std::string& sink : g.sinks) {
    for (const PathDelay& pd : enumerate_path_delays(g, sink)) {
      on_route[g.source] = true;
      for (const Edge& e : pd.path) {
        on_route[e.from] = true;
        on_route[e.to] = true;
      }
    }
  }
  for (const auto& [node, hit] : on_route) {
    if (!hit) inert.push_back(node);
  }
  return inert;
}

/// Deadbeat output-injection gain for a single residual direction via
/// Ackermann's formula: K = F^q O^{-1} e_q.
MatrixXd deadbeat_single(const MatrixXd& f, const MatrixXd& c,
                         const ToleranceConfig& tol) {
  const Index q = f.rows();
  MatrixXd obs(q, q);
  MatrixXd row = c;
  for (Index k = 0; k < q; ++k) {
    obs.row(k) = row;
    row = row * f;
  }
  if (matrix_rank(obs, tol) < q) {
    throw NumericalError(
        "factor pair lost observability (single residual direction); loosen "
        "rank tolerance or re-examine the class layout");
  }
  VectorXd e_q = VectorXd::Zero(q);
  e_q(q - 1) = 1.0;
  VectorXd z = obs.fullPivLu().solve(e_q);
  MatrixXd f_pow = MatrixXd::Identity(q, q);
  for (Index k = 0; k < q; ++k) f_pow = f * f_pow;
  return f_pow * z;
}

/// Deadbeat gain for several residual directions by eigenvalue deflation:
/// real eigenvalues are cancelled with rank-one updates, complex pairs with
/// rank-two updates, each leaving the remaining spectrum in place.
MatrixXd deadbeat_multi(const MatrixXd& f, const MatrixXd& c) {
  const Index q = f.rows();
  const double scale = 1.0 + f.cwiseAbs().maxCoeff();
  MatrixXd gain = MatrixXd::Zero(q, c.rows());
  const int max_steps = static_cast<int>(4 * q + 8);
  for (int step = 0; step < max_steps; ++step) {
    MatrixXd m = f - gain * c;
    Eigen::EigenSolver<MatrixXd> es(m);
    if (es.info() != Eigen::Success) {
      throw NumericalError("eigenvalue iteration failed during deadbeat gain "
                           "placement");
    }
    Index worst = -1;
    double worst_mag = 1e-9 * scale;
    for (Index i = 0; i < q; ++i) {
      double mag = std::abs(es.eigenvalues()(i));
      if (mag > worst_mag) {
        worst_mag = mag;
        worst = i;
      }
    }
    if (worst < 0) return gain;  // spectrum numerically at zero
    const std::complex<double> lambda = es.eigenvalues()(worst);
    const Eigen::VectorXcd v = es.eigenvectors().col(worst);
    if (std::abs(lambda.imag()) <= 1e-9 * std::abs(lambda)) {
      // Real eigenvalue: rank-one update K += w g^T with g chosen so the
      // shifted eigenvalue lambda - g^T (C w) lands at zero.
      VectorXd w = v.real();
      if (w.norm() < 0.5 * v.norm()) w = v.imag();
      w.normalize();
      VectorXd cw = c * w;
      double cw2 = cw.squaredNorm();
      if (cw2 < 1e-20 * scale * scale) {
        throw NumericalError(
            "deadbeat placement hit an unobservable eigenvector");
      }
      gain += w * (lambda.real() / cw2 * cw).transpose();
    } else {
      // Complex pair: rank-two update on the real invariant plane
      // W = [Re v, Im v], chosen so the 2x2 block Lambda is cancelled.
      MatrixXd w(q, 2);
      w.col(0) = v.real();
      w.col(1) = v.imag();
      MatrixXd lam(2, 2);
      lam << lambda.real(), lambda.imag(), -lambda.imag(), lambda.real();
      MatrixXd cw = c * w;  // rows x 2
      Eigen::JacobiSVD<MatrixXd> svd(cw);
      if (svd.singularValues().size() < 2 ||
          svd.singularValues()(1) < 1e-10 * svd.singularValues()(0)) {
        throw NumericalError(
            "deadbeat placement cannot cancel a complex pair: the pair's "
            "plane projects onto fewer than two output directions");
      }
      Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(cw);
      MatrixXd g2 = lam * cod.pseudoInverse();  // 2 x rows
      gain += w * g2;
    }
  }
  throw NumericalError("deadbeat gain placement did not converge");
}

}  // namespace

std::string to_string(GraphSide side) {
  return side == GraphSide::Actuation ? "actuation" : "measurement";
}

std::string to_string(const EdgeRef& e) {
  return (e.side == GraphSide::Actuation ? std::string("R:") : "O:") + e.from +
         "->" + e.to;
}

std::string to_string(FailureProtocol protocol) {
  return protocol == FailureProtocol::ZeroOut ? "zero-out" : "hold-last";
}

std::string to_string(McnCase c) {
  switch (c) {
    case McnCase::GRmultiGOsingle:
      return "multi-hop-actuation/single-hop-measurement";
    case McnCase::GRsingleGOmulti:
      return "single-hop-actuation/multi-hop-measurement";
    case McnCase::BothMulti:
      return "multi-hop-both";
    case McnCase::BothSingle:
      return "single-hop-both";
  }
  return "unknown";
}

McnCase detect_case(const McnModel& model) {
  const bool r_multi = has_multi_hop_route(model.g_r);
  const bool o_multi = has_multi_hop_route(model.g_o);
  if (r_multi && o_multi) return McnCase::BothMulti;
  if (r_multi) return McnCase::GRmultiGOsingle;
  if (o_multi) return McnCase::GRsingleGOmulti;
  return McnCase::BothSingle;
}

std::pair<MatrixXd, MatrixXd> faulty_realization(const McnModel& model,
                                                 const FailureConfig& f) {
  FaultyGammas fg = faulty_gammas(model, f.edges);
  Realization ctrl_f = realize_controllability_raw(fg.r);
  Realization obs_f = realize_observability_raw(fg.o);
  DiscreteLTI sys_f = assemble_mcn(obs_f, model.plant, ctrl_f);
  return {std::move(sys_f.a), std::move(sys_f.b)};
}

FailureSignature failure_signature(const McnModel& model,
                                   const FailureConfig& f,
                                   const ToleranceConfig& tol) {
  FaultyGammas fg = faulty_gammas(model, f.edges);

  FailureSignature sig;
  sig.delta_r = Eigen::RowVectorXd::Zero(model.d_r);
  for (Index d = 1; d <= model.d_r; ++d) {
    sig.delta_r(d - 1) = model.gamma_r.coeff(d) - fg.r[d - 1];
  }
  sig.delta_o = MatrixXd::Zero(model.n_s, model.d_o);
  for (Index i = 0; i < model.n_s; ++i) {
    for (Index d = 1; d <= model.d_o; ++d) {
      sig.delta_o(i, d - 1) = model.gamma_o[i].coeff(d) - fg.o[i][d - 1];
    }
  }

  Realization ctrl_f = realize_controllability_raw(fg.r);
  Realization obs_f = realize_observability_raw(fg.o);
  DiscreteLTI sys_f = assemble_mcn(obs_f, model.plant, ctrl_f);
  sig.d_a = model.sys.a - sys_f.a;
  sig.d_b = model.sys.b - sys_f.b;

  // Internal invariant: the perturbation is confined to the delivered-output
  // rows and the head row of the actuation chain.
  const Index head = model.n_o + model.n_p;
  const double limit =
      1e-12 * (1.0 + model.sys.a.cwiseAbs().maxCoeff());
  for (Index r = 0; r < sig.d_a.rows(); ++r) {
    if (r < model.n_s || r == head) continue;
    const double mag = std::max(sig.d_a.row(r).cwiseAbs().maxCoeff(),
                                sig.d_b.row(r).cwiseAbs().maxCoeff());
    if (mag > limit) {
      throw NumericalError(
          "failure perturbation escaped its structural rows (internal "
          "invariant)");
    }
  }

  sig.image = Subspace::span(stack_images(sig.d_a, sig.d_b), tol);
  return sig;
}

std::vector<std::size_t> FailureClassSet::phi_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (!omega[i].in_sigma) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FailureClassSet::phi_nonzero_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (!omega[i].in_sigma && !omega[i].is_zero_class()) out.push_back(i);
  }
  return out;
}

Eigen::Index FailureClassSet::n_phi() const {
  Index total = 0;
  for (std::size_t i : phi_nonzero_indices()) {
    total += omega[i].signature.image.dim();
  }
  return total;
}

FailureClassSet enumerate_failure_classes(const McnModel& model,
                                          const EnumerationOptions& opts,
                                          const ToleranceConfig& tol) {
  FailureClassSet set;
  set.mcn_case = detect_case(model);
  switch (set.mcn_case) {
    case McnCase::GRmultiGOsingle:
      set.enumerated_sides = {GraphSide::Actuation};
      break;
    case McnCase::GRsingleGOmulti:
    case McnCase::BothSingle:
      set.enumerated_sides = {GraphSide::Measurement};
      break;
    case McnCase::BothMulti:
      set.enumerated_sides = {GraphSide::Actuation, GraphSide::Measurement};
      break;
  }
  set.exhaustive = !opts.max_cardinality.has_value();

  const Index key_len = model.d_r + model.n_s * model.d_o;
  std::vector<ClassDraft> drafts;
  drafts.push_back(
      {VectorXd::Zero(key_len), {}, {std::vector<EdgeRef>{}}});

  for (GraphSide side : set.enumerated_sides) {
    const ScheduledGraph& g = side_graph(model, side);
    const int n_edges = static_cast<int>(g.edges.size());
    int card = opts.max_cardinality.value_or(n_edges);
    card = std::min(card, n_edges);
    if (card < 0) {
      throw ValidationError("cardinality bound must be nonnegative");
    }
    if (set.exhaustive && n_edges > 16) {
      throw BudgetError("exhaustive enumeration over " +
                        std::to_string(n_edges) + " " + to_string(side) +
                        " links exceeds the 16-link budget; pass a "
                        "cardinality bound");
    }
    if (n_edges > 31 || subset_count(n_edges, card) > 2'000'000) {
      throw BudgetError("bounded enumeration over " +
                        std::to_string(n_edges) + " " + to_string(side) +
                        " links still exceeds the subset budget; lower the "
                        "cardinality bound");
    }

    const std::vector<MaskedPath> paths = masked_paths(g);
    const Index offset_r = 0;
    const Index offset_o = model.d_r;

    for_each_subset(n_edges, card, [&](std::uint32_t mask) {
      VectorXd key = VectorXd::Zero(key_len);
      for (const MaskedPath& mp : paths) {
        if ((mp.mask & mask) == 0) continue;
        if (side == GraphSide::Actuation) {
          key(offset_r + mp.delay - 1) += mp.weight;
        } else {
          key(offset_o + mp.sink_index * model.d_o + mp.delay - 1) +=
              mp.weight;
        }
      }
      for (ClassDraft& draft : drafts) {
        if ((draft.key - key).lpNorm<Eigen::Infinity>() <=
            opts.signature_tol) {
          draft.members.push_back(decode_mask(g, side, mask));
          return;
        }
      }
      ClassDraft draft;
      draft.key = std::move(key);
      draft.representative = decode_mask(g, side, mask);
      draft.members = {draft.representative};
      drafts.push_back(std::move(draft));
    });
  }

  // Flag classes whose profile drop equals a sum of other nonzero classes.
  std::vector<bool> in_sigma(drafts.size(), false);
  for (std::size_t i = 1; i < drafts.size(); ++i) {
    std::vector<const VectorXd*> others;
    for (std::size_t j = 1; j < drafts.size(); ++j) {
      if (j != i) others.push_back(&drafts[j].key);
    }
    in_sigma[i] = sum_expressible(drafts[i].key, others, opts.signature_tol);
  }

  set.omega.reserve(drafts.size());
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    FailureClass fc;
    fc.representative = drafts[i].representative;
    fc.signature = failure_signature(
        model, {drafts[i].representative, FailureProtocol::ZeroOut}, tol);
    fc.members = std::move(drafts[i].members);
    fc.in_sigma = in_sigma[i];
    set.omega.push_back(std::move(fc));
  }
  return set;
}

DetectabilityReport classify_detectability(const McnModel& model,
                                           const EnumerationOptions& opts,
                                           const ToleranceConfig& tol) {
  DetectabilityReport rep;
  rep.classes = enumerate_failure_classes(model, opts, tol);
  rep.mcn_case = rep.classes.mcn_case;
  rep.tree = is_scheduling_tree(model.g_o);
  rep.n_s = model.n_s;
  rep.n_phi = rep.classes.n_phi();

  const MatrixXd& a = model.sys.a;
  const MatrixXd& c = model.sys.c;
  const Index n = model.n();

  const std::vector<std::size_t> phi_nz = rep.classes.phi_nonzero_indices();
  std::vector<Subspace> images;
  images.reserve(phi_nz.size());
  Subspace l_phi = Subspace::zero(n);
  for (std::size_t idx : phi_nz) {
    images.push_back(rep.classes.omega[idx].signature.image);
    l_phi = sum(l_phi, images.back(), tol);
  }
  rep.d_l_phi = l_phi.dim();

  const std::vector<bool> verdicts = efprg_check(a, c, images, tol);
  rep.solvable.assign(rep.classes.omega.size(), std::nullopt);
  rep.all_solvable = true;
  for (std::size_t i = 0; i < phi_nz.size(); ++i) {
    rep.solvable[phi_nz[i]] = verdicts[i];
    rep.all_solvable = rep.all_solvable && verdicts[i];
  }

  const Subspace unobservable = uosa(a, c, Subspace::zero(n), tol);
  const Subspace output_span = orth_complement(kernel(c, tol), tol);

  switch (rep.mcn_case) {
    case McnCase::GRmultiGOsingle: {
      rep.structural_prediction = phi_nz.size() <= 1;
      if (!rep.all_solvable) {
        if (phi_nz.size() > 1) {
          // Expected: every actuation class shares one signature direction.
        } else if (unobservable.dim() > 0) {
          rep.annotations.push_back(
              "single actuation class unsolvable: the assembled pair has " +
              std::to_string(unobservable.dim()) +
              " unobservable mode(s); the class-count condition alone does "
              "not decide solvability here");
        } else {
          rep.internal_inconsistency = true;
          rep.annotations.push_back(
              "one observable actuation class should be solvable but the "
              "subspace test disagrees");
        }
      } else if (phi_nz.size() > 1) {
        rep.internal_inconsistency = true;
        rep.annotations.push_back(
            "multiple actuation classes share one signature direction yet "
            "all test solvable");
      }
      if (rep.all_solvable) {
        rep.recommendation =
            "The actuation-failure class is detectable online. Actuation "
            "links share a single signature direction, so isolating "
            "individual links would need link-level acknowledgements outside "
            "this model.";
      } else {
        rep.recommendation =
            "Actuation classes cannot be isolated: with multi-hop actuation "
            "relays all link sets perturb the same direction. Use a "
            "single-hop actuation layout or link-level acknowledgements.";
      }
      break;
    }
    case McnCase::GRsingleGOmulti:
    case McnCase::BothSingle: {
      rep.structural_prediction = rep.tree.is_tree;
      const bool independent = rep.d_l_phi == rep.n_phi;
      if (rep.all_solvable != independent) {
        rep.internal_inconsistency = true;
        rep.annotations.push_back(
            "per-class verdicts and the signature-independence test "
            "disagree (d(L)=" + std::to_string(rep.d_l_phi) +
            ", sum of class dimensions=" + std::to_string(rep.n_phi) + ")");
      }
      if (rep.tree.is_tree && !rep.all_solvable) {
        rep.internal_inconsistency = true;
        rep.annotations.push_back(
            "the measurement graph is a scheduling tree yet some class "
            "tests unsolvable");
      }
      if (rep.tree.is_tree && rep.all_solvable) {
        if (rep.n_phi != rep.n_s || !equal(l_phi, output_span, tol)) {
          rep.internal_inconsistency = true;
          rep.annotations.push_back(
              "tree layout should give one independent class per "
              "terminating node spanning the delivered-output directions");
        }
      }
      if (!rep.tree.is_tree && rep.all_solvable) {
        const std::vector<std::string> inert = inert_nodes(model.g_o);
        if (!inert.empty()) {
          rep.annotations.push_back(
              "solvable despite the non-tree diagnosis: node(s) " +
              join(inert) + " carry no scheduled route");
        } else {
          rep.annotations.push_back(
              "solvable despite the non-tree diagnosis: distinct link sets "
              "collapse to identical or summed signatures");
        }
      }
      if (rep.all_solvable) {
        rep.recommendation =
            "Every distinguished failure class is solvable; synthesize the "
            "residual bank to isolate measurement-side link failures "
            "online.";
      } else {
        rep.recommendation =
            "Some classes are not isolable. Reschedule the measurement "
            "relays as a tree with one scheduled route per terminating node "
            "(the tree designer builds such layouts).";
      }
      break;
    }
    case McnCase::BothMulti: {
      rep.structural_prediction = false;
      if (rep.all_solvable && !phi_nz.empty()) {
        if (strictly_multi_hop(model.g_r) && strictly_multi_hop(model.g_o)) {
          rep.internal_inconsistency = true;
          rep.annotations.push_back(
              "strictly multi-hop relays on both sides should never be "
              "solvable");
        } else {
          rep.annotations.push_back(
              "solvable classes exist, but a single-hop route keeps this "
              "instance outside the strict multi-hop hypothesis");
        }
      }
      rep.recommendation =
          "No failure class is isolable with multi-hop relays on both "
          "sides: actuation classes contaminate every unobservability "
          "envelope. Use a single-hop actuation layout or add link-level "
          "acknowledgements.";
      break;
    }
  }
  if (rep.internal_inconsistency) {
    rep.recommendation =
        "Internal consistency check failed: structural theory and subspace "
        "algebra disagree on this instance. Retry with adjusted tolerances "
        "and keep the instance for analysis.";
  }
  return rep;
}

ResidualBank synthesize_residual_bank(const McnModel& model,
                                      const FailureClassSet& classes,
                                      const ToleranceConfig& tol) {
  const MatrixXd& a = model.sys.a;
  const MatrixXd& b = model.sys.b;
  const MatrixXd& c = model.sys.c;
  const Index n = model.n();

  const std::vector<std::size_t> phi_nz = classes.phi_nonzero_indices();
  if (phi_nz.empty()) {
    throw ValidationError(
        "no nonzero distinguished failure class: nothing to isolate");
  }
  std::vector<Subspace> images;
  images.reserve(phi_nz.size());
  for (std::size_t idx : phi_nz) {
    images.push_back(classes.omega[idx].signature.image);
  }
  const std::vector<bool> verdicts = efprg_check(a, c, images, tol);
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    if (!verdicts[i]) {
      std::vector<std::string> parts;
      for (const EdgeRef& e : classes.omega[phi_nz[i]].representative) {
        parts.push_back(to_string(e));
      }
      throw ValidationError(
          "class [" + join(parts) + "] is not solvable (" +
          to_string(classes.mcn_case) +
          "); a residual bank needs a tree-type measurement layout");
    }
  }

  ResidualBank bank;
  bank.n = n;
  for (std::size_t i = 0; i < phi_nz.size(); ++i) {
    Subspace l_bar = Subspace::zero(n);
    for (std::size_t j = 0; j < phi_nz.size(); ++j) {
      if (j != i) l_bar = sum(l_bar, images[j], tol);
    }
    const Subspace s = uosa(a, c, l_bar, tol);
    if (s.dim() >= n) {
      throw NumericalError(
          "unobservability envelope fills the whole state space for a "
          "solvable class (internal)");
    }
    const MatrixXd s_b = s.basis();
    const MatrixXd t_b = orth_complement(s, tol).basis();
    const Index q = t_b.cols();

    MatrixXd x_gain = MatrixXd::Zero(q, model.n_s);
    if (s.dim() > 0) {
      const MatrixXd cs = c * s_b;
      const MatrixXd tas = t_b.transpose() * a * s_b;
      Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(cs);
      x_gain = tas * cod.pseudoInverse();
      const double resid =
          (x_gain * cs - tas).cwiseAbs().maxCoeff();
      if (resid > 1e-8 * (1.0 + a.cwiseAbs().maxCoeff())) {
        throw NumericalError(
            "output injection cannot keep the unobservability envelope "
            "invariant (internal)");
      }
    }

    const Subspace cs_image = image(c, s, tol);
    const Subspace h_space = orth_complement(cs_image, tol);
    if (h_space.dim() == 0) {
      throw NumericalError(
          "no residual direction survives the decoupling projection "
          "(internal)");
    }
    const MatrixXd h = h_space.basis().transpose();

    ResidualGenerator gen;
    gen.class_index = phi_nz[i];
    {
      std::vector<std::string> parts;
      for (const EdgeRef& e : classes.omega[phi_nz[i]].representative) {
        parts.push_back(to_string(e));
      }
      gen.label = "[" + join(parts) + "]";
    }
    const MatrixXd f0 = t_b.transpose() * a * t_b - x_gain * c * t_b;
    const MatrixXd c_t = h * c * t_b;
    const MatrixXd k_t = c_t.rows() == 1 ? deadbeat_single(f0, c_t, tol)
                                         : deadbeat_multi(f0, c_t);
    gen.f = f0 - k_t * c_t;
    gen.g_u = t_b.transpose() * b;
    gen.g_y = x_gain + k_t * h;
    gen.h = h;
    gen.c_t = c_t;

    const double f_scale = 1.0 + gen.f.cwiseAbs().maxCoeff();
    MatrixXd power = MatrixXd::Identity(q, q);
    gen.settle_frames = q;
    for (Index k = 1; k <= q; ++k) {
      power = gen.f * power;
      if (power.cwiseAbs().maxCoeff() <= 1e-11 * f_scale) {
        gen.settle_frames = k;
        break;
      }
    }
    if (power.cwiseAbs().maxCoeff() > 1e-7 * f_scale) {
      throw NumericalError(
          "residual error map failed to become nilpotent within its "
          "dimension");
    }
    bank.max_settle = std::max(bank.max_settle, gen.settle_frames);
    bank.generators.push_back(std::move(gen));
  }
  return bank;
}

MatrixXd bank_residuals(const ResidualBank& bank, const MatrixXd& y,
                        const std::vector<double>& u) {
  if (bank.generators.empty()) {
    throw ValidationError("residual bank is empty");
  }
  if (static_cast<std::size_t>(y.rows()) != u.size()) {
    throw ValidationError("output trace and input trace lengths differ");
  }
  if (y.cols() != bank.generators.front().g_y.cols()) {
    throw ValidationError("output trace width does not match the bank");
  }
  const Index frames = y.rows();
  MatrixXd mags(frames, static_cast<Index>(bank.generators.size()));
  for (std::size_t gi = 0; gi < bank.generators.size(); ++gi) {
    const ResidualGenerator& gen = bank.generators[gi];
    VectorXd w = VectorXd::Zero(gen.f.rows());
    for (Index k = 0; k < frames; ++k) {
      const VectorXd yk = y.row(k).transpose();
      const VectorXd r = gen.h * yk - gen.c_t * w;
      mags(k, static_cast<Index>(gi)) = r.lpNorm<Eigen::Infinity>();
      w = gen.f * w + gen.g_u * u[static_cast<std::size_t>(k)] + gen.g_y * yk;
    }
  }
  return mags;
}

DetectionResult run_detector(const ResidualBank& bank, const MatrixXd& y,
                             const std::vector<double>& u,
                             const DetectorConfig& config) {
  if (config.threshold <= 0.0) {
    throw ValidationError("detector threshold must be positive");
  }
  if (config.persistence < 1) {
    throw ValidationError("detector persistence must be at least 1");
  }
  if (y.rows() <= bank.n) {
    throw ValidationError(
        "trace is shorter than the settling transient (" +
        std::to_string(static_cast<long long>(bank.n)) + " frames)");
  }
  DetectionResult result;
  result.residuals = bank_residuals(bank, y, u);
  const Index frames = result.residuals.rows();
  result.detected.assign(static_cast<std::size_t>(frames), {});
  for (Index k = 0; k < frames; ++k) {
    const Index lo = k - config.persistence + 1;
    if (lo < bank.n) continue;
    for (Index g = 0; g < result.residuals.cols(); ++g) {
      bool firing = true;
      for (Index j = lo; j <= k && firing; ++j) {
        firing = result.residuals(j, g) > config.threshold;
      }
      if (firing) {
        result.detected[static_cast<std::size_t>(k)].push_back(
            static_cast<std::size_t>(g));
      }
    }
  }
  return result;
}

}  // namespace mcn
