#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "descpol/descriptive.hpp"
#include "descpol/errors.hpp"
#include "descpol/network.hpp"
#include "descpol/partition.hpp"
#include "descpol/translation.hpp"

namespace descpol {

inline constexpr std::size_t kMaxEnumeratedStates = 1'000'000;

struct Successor {
    std::size_t state = 0;
    double probability = 0.0;
};

/// Finite MDP with per-(state, action) successor lists. Actions may be marked unavailable
/// in some states (used by induced descriptive models).
class TabularMDP {
public:
    TabularMDP() = default;
    TabularMDP(std::size_t states, std::size_t actions, double gamma,
               Objective objective = Objective::maximize)
        : states_(states), actions_(actions), gamma_(gamma), objective_(objective),
          transitions_(states * actions), utility_(states * actions, 0.0), available_(states * actions, 1) {
        if (states < 1 || actions < 1) throw ValidationError("MDP needs at least one state and one action");
        if (states > kMaxEnumeratedStates)
            throw ValidationError("MDP has " + std::to_string(states) + " states; the limit is " +
                                  std::to_string(kMaxEnumeratedStates));
    }

    std::size_t state_count() const noexcept { return states_; }
    std::size_t action_count() const noexcept { return actions_; }
    double gamma() const noexcept { return gamma_; }
    Objective objective() const noexcept { return objective_; }

    const std::vector<Successor>& successors(std::size_t s, std::size_t a) const { return transitions_[at(s, a)]; }
    void set_successors(std::size_t s, std::size_t a, std::vector<Successor> row) {
        transitions_[at(s, a)] = std::move(row);
    }
    void add_successor(std::size_t s, std::size_t a, std::size_t next, double probability) {
        transitions_[at(s, a)].push_back({next, probability});
    }

    double utility(std::size_t s, std::size_t a) const { return utility_[at(s, a)]; }
    void set_utility(std::size_t s, std::size_t a, double u) { utility_[at(s, a)] = u; }

    bool available(std::size_t s, std::size_t a) const { return available_[at(s, a)] != 0; }
    void set_available(std::size_t s, std::size_t a, bool value) { available_[at(s, a)] = value ? 1 : 0; }

    /// Every available row must be a probability distribution (sum within `tol` of 1).
    void validate(double tol = 1e-12) const {
        if (!(gamma_ >= 0.0 && gamma_ < 1.0)) throw ValidationError("discount factor must lie in [0, 1)");
        for (std::size_t s = 0; s < states_; ++s) {
            bool any = false;
            for (std::size_t a = 0; a < actions_; ++a) {
                if (!available(s, a)) continue;
                any = true;
                if (!std::isfinite(utility(s, a)))
                    throw ValidationError("non-finite utility at state " + std::to_string(s));
                double total = 0.0;
                for (const auto& x : successors(s, a)) {
                    if (x.state >= states_ || !(x.probability >= 0.0))
                        throw ValidationError("invalid successor in row (" + std::to_string(s) + ", " +
                                              std::to_string(a) + ")");
                    total += x.probability;
                }
                if (std::abs(total - 1.0) > tol)
                    throw ValidationError("transition row (" + std::to_string(s) + ", " + std::to_string(a) +
                                          ") sums to " + std::to_string(total));
            }
            if (!any) throw ValidationError("state " + std::to_string(s) + " has no available action");
        }
    }

private:
    std::size_t at(std::size_t s, std::size_t a) const {
        if (s >= states_ || a >= actions_) throw DomainError("state/action index out of range");
        return s * actions_ + a;
    }

    std::size_t states_ = 0;
    std::size_t actions_ = 0;
    double gamma_ = 0.9;
    Objective objective_ = Objective::maximize;
    std::vector<std::vector<Successor>> transitions_;
    std::vector<double> utility_;
    std::vector<std::uint8_t> available_;
};

struct ValueIterationResult {
    std::vector<double> values;
    std::vector<std::size_t> policy;
    std::vector<double> residuals;  // sup-norm change per sweep
};

/// Jacobi value iteration. Stops once gamma/(1-gamma) * residual <= tol, which bounds the
/// sup-norm distance to the fixed point by tol.
inline ValueIterationResult value_iteration(const TabularMDP& mdp, double tol = 1e-12,
                                            std::size_t max_sweeps = 1'000'000) {
    mdp.validate();
    const std::size_t S = mdp.state_count(), A = mdp.action_count();
    const bool maximize = mdp.objective() == Objective::maximize;
    const double gamma = mdp.gamma();
    const double bound = gamma > 0.0 ? gamma / (1.0 - gamma) : 0.0;

    ValueIterationResult r;
    r.values.assign(S, 0.0);
    r.policy.assign(S, 0);
    std::vector<double> next(S);
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        double residual = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            double best = maximize ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
            std::size_t best_a = 0;
            for (std::size_t a = 0; a < A; ++a) {
                if (!mdp.available(s, a)) continue;
                double q = 0.0;
                for (const auto& x : mdp.successors(s, a)) q += x.probability * r.values[x.state];
                q = mdp.utility(s, a) + gamma * q;
                if (maximize ? q > best : q < best) {
                    best = q;
                    best_a = a;
                }
            }
            next[s] = best;
            r.policy[s] = best_a;
            residual = std::max(residual, std::abs(best - r.values[s]));
        }
        r.values.swap(next);
        r.residuals.push_back(residual);
        if (bound * residual <= tol) return r;
    }
    throw NumericalError("value iteration did not converge within the sweep limit");
}

/// Finite MDP whose states are item configurations. Action a encodes (item a / D, decision a % D).
struct ItemSystemMDP {
    TabularMDP mdp;
    std::vector<TypicalState> states;
    std::size_t items = 0;
    std::size_t decision_count = 1;

    std::size_t action_index(std::size_t item, std::size_t decision = 0) const {
        return item * decision_count + decision;
    }
    TypicalAction action(std::size_t a) const { return TypicalAction{a / decision_count, {a % decision_count}}; }
};

/// Per-item feature distribution for i.i.d. item systems.
struct ItemFeatureDistribution {
    std::vector<FeatureVector> support;
    std::vector<double> probabilities;
};

using ItemUtility = std::function<double(const FeatureVector& chosen, std::size_t decision)>;

/// Every item redraws its features i.i.d. from `dist` each step, independently of the action.
/// The utility depends only on the chosen item's features and decision.
inline ItemSystemMDP build_iid_item_system(std::size_t items, const ItemFeatureDistribution& dist,
                                           const ItemUtility& utility, double gamma,
                                           std::size_t decision_count = 1) {
    const std::size_t support = dist.support.size();
    if (items < 1 || support < 1 || dist.probabilities.size() != support)
        throw ValidationError("item distribution support and probabilities must be nonempty and aligned");
    double total = 0.0;
    for (double p : dist.probabilities) total += p;
    if (std::abs(total - 1.0) > 1e-12) throw ValidationError("item feature probabilities must sum to 1");

    std::size_t count = 1;
    for (std::size_t n = 0; n < items; ++n) {
        if (count > kMaxEnumeratedStates / support)
            throw ValidationError("typical state space exceeds " + std::to_string(kMaxEnumeratedStates) + " states");
        count *= support;
    }
    if (count * count > 50'000'000)
        throw ValidationError("dense i.i.d. transition table too large for the tabular oracle");

    ItemSystemMDP sys;
    sys.items = items;
    sys.decision_count = decision_count;
    sys.mdp = TabularMDP(count, items * decision_count, gamma);
    sys.states.resize(count);

    std::vector<double> prob(count, 1.0);
    std::vector<std::size_t> digits(items, 0);
    for (std::size_t s = 0; s < count; ++s) {
        std::size_t rem = s;
        for (std::size_t n = items; n-- > 0;) {
            digits[n] = rem % support;
            rem /= support;
        }
        auto& st = sys.states[s];
        st.items.resize(items);
        for (std::size_t n = 0; n < items; ++n) {
            st.items[n] = dist.support[digits[n]];
            prob[s] *= dist.probabilities[digits[n]];
        }
    }
    std::vector<Successor> row;
    for (std::size_t s = 0; s < count; ++s)
        if (prob[s] > 0.0) row.push_back({s, prob[s]});
    for (std::size_t s = 0; s < count; ++s)
        for (std::size_t n = 0; n < items; ++n)
            for (std::size_t m = 0; m < decision_count; ++m) {
                const auto a = sys.action_index(n, m);
                sys.mdp.set_successors(s, a, row);
                sys.mdp.set_utility(s, a, utility(sys.states[s].items[n], m));
            }
    return sys;
}

namespace detail {

inline std::map<std::vector<FeatureVector>, std::size_t> state_lookup(const ItemSystemMDP& sys) {
    std::map<std::vector<FeatureVector>, std::size_t> index;
    for (std::size_t s = 0; s < sys.states.size(); ++s) index.emplace(sys.states[s].items, s);
    return index;
}

inline std::map<std::size_t, double> row_map(const std::vector<Successor>& row) {
    std::map<std::size_t, double> out;
    for (const auto& x : row) out[x.state] += x.probability;
    return out;
}

}  // namespace detail

/// Checks that swapping any two items maps the model onto itself: utilities and transition
/// kernels are invariant under the joint relabelling of states and actions.
inline void validate_identical_statistics(const ItemSystemMDP& sys, double tol = 1e-12) {
    if (sys.states.size() != sys.mdp.state_count()) throw ValidationError("item system has no state features");
    const auto lookup = detail::state_lookup(sys);
    const std::size_t S = sys.mdp.state_count();

    std::vector<std::size_t> swapped(S);
    for (std::size_t n1 = 0; n1 < sys.items; ++n1)
        for (std::size_t n2 = n1 + 1; n2 < sys.items; ++n2) {
            for (std::size_t s = 0; s < S; ++s) {
                auto items = sys.states[s].items;
                std::swap(items[n1], items[n2]);
                auto it = lookup.find(items);
                if (it == lookup.end())
                    throw ValidationError("items " + std::to_string(n1) + " and " + std::to_string(n2) +
                                          ": swapped state of " + std::to_string(s) + " is not enumerated");
                swapped[s] = it->second;
            }
            auto swap_item = [&](std::size_t n) { return n == n1 ? n2 : (n == n2 ? n1 : n); };
            for (std::size_t s = 0; s < S; ++s)
                for (std::size_t a = 0; a < sys.mdp.action_count(); ++a) {
                    const auto act = sys.action(a);
                    const auto sa = sys.action_index(swap_item(act.item), act.decisions[0]);
                    const std::size_t ss = swapped[s];
                    auto fail = [&](const char* what) {
                        throw ValidationError("items " + std::to_string(n1) + " and " + std::to_string(n2) +
                                              " do not have identical statistics (" + what + " at state " +
                                              std::to_string(s) + ", action " + std::to_string(a) + ")");
                    };
                    if (std::abs(sys.mdp.utility(s, a) - sys.mdp.utility(ss, sa)) > tol) fail("utility");
                    const auto lhs = detail::row_map(sys.mdp.successors(s, a));
                    const auto rhs = detail::row_map(sys.mdp.successors(ss, sa));
                    std::map<std::size_t, double> mapped;
                    for (const auto& [next, p] : lhs) mapped[swapped[next]] += p;
                    for (const auto& [next, p] : mapped) {
                        auto it = rhs.find(next);
                        if (std::abs(p - (it == rhs.end() ? 0.0 : it->second)) > tol) fail("transition");
                    }
                    for (const auto& [next, p] : rhs)
                        if (!mapped.count(next) && std::abs(p) > tol) fail("transition");
                }
        }
}

struct DescriptiveMDP {
    TabularMDP mdp;
    std::vector<DescriptiveState> states;
    std::vector<std::size_t> typical_to_descriptive;
    DescriptiveActionSpace actions;
};

/// Model induced on descriptive states by d_s.
///
/// Each descriptive state aggregates its typical preimages, weighted by `weights` (uniform when
/// empty). A descriptive action (h, m) taken in typical state s is the uniform mixture over the
/// items of N(h) of the typical action (n, m); utilities and transitions are averaged the same way.
inline DescriptiveMDP induce_descriptive_mdp(const ItemSystemMDP& sys, const PartitionScheme& scheme,
                                             std::span<const double> weights = {}) {
    const std::size_t S = sys.mdp.state_count();
    if (sys.states.size() != S) throw ValidationError("item system has no state features");
    if (!weights.empty() && weights.size() != S) throw ShapeError("preimage weights must match the state count");

    DescriptiveMDP out;
    std::vector<DecisionSet> decisions{{"decision", std::vector<double>(sys.decision_count)}};
    for (std::size_t m = 0; m < sys.decision_count; ++m) decisions[0].values[m] = static_cast<double>(m);
    out.actions = DescriptiveActionSpace(scheme.shape(), decisions);

    std::map<std::vector<std::uint8_t>, std::size_t> index;
    out.typical_to_descriptive.resize(S);
    for (std::size_t s = 0; s < S; ++s) {
        auto ds = translate_state(sys.states[s], scheme);
        std::vector<std::uint8_t> key(ds.bits().begin(), ds.bits().end());
        auto [it, inserted] = index.emplace(std::move(key), out.states.size());
        if (inserted) out.states.push_back(std::move(ds));
        out.typical_to_descriptive[s] = it->second;
    }

    const std::size_t D = out.states.size();
    std::vector<double> mass(D, 0.0);
    for (std::size_t s = 0; s < S; ++s) mass[out.typical_to_descriptive[s]] += weights.empty() ? 1.0 : weights[s];
    for (std::size_t d = 0; d < D; ++d)
        if (!(mass[d] > 0.0)) throw ValidationError("descriptive state with zero preimage weight");

    const std::size_t A = out.actions.size();
    std::vector<std::map<std::size_t, double>> rows(D * A);
    std::vector<double> util(D * A, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
        const std::size_t d = out.typical_to_descriptive[s];
        const double w = (weights.empty() ? 1.0 : weights[s]) / mass[d];
        for (const auto& h : out.states[d].occupied()) {
            const auto members = items_in_condition(sys.states[s], h, scheme);
            const double share = w / static_cast<double>(members.size());
            for (std::size_t m = 0; m < sys.decision_count; ++m) {
                const std::size_t da = out.actions.index_of(DescriptiveAction{h, {m}});
                for (auto n : members) {
                    const auto a = sys.action_index(n, m);
                    util[d * A + da] += share * sys.mdp.utility(s, a);
                    for (const auto& x : sys.mdp.successors(s, a))
                        rows[d * A + da][out.typical_to_descriptive[x.state]] += share * x.probability;
                }
            }
        }
    }

    out.mdp = TabularMDP(D, A, sys.mdp.gamma(), sys.mdp.objective());
    for (std::size_t d = 0; d < D; ++d) {
        const auto mask = out.actions.feasible_mask(out.states[d]);
        for (std::size_t a = 0; a < A; ++a) {
            out.mdp.set_available(d, a, mask[a] != 0);
            if (!mask[a]) continue;
            std::vector<Successor> row;
            for (const auto& [next, p] : rows[d * A + a]) row.push_back({next, p});
            out.mdp.set_successors(d, a, std::move(row));
            out.mdp.set_utility(d, a, util[d * A + a]);
        }
    }
    return out;
}

struct Theorem1Gap {
    double gap = 0.0;
    std::vector<double> typical_values;
    std::vector<double> descriptive_values;  // per typical state, J_b(d_s(s))
    std::size_t descriptive_states = 0;
};

/// max_s |J*(s) - J_b(d_s(s))| with a uniform 2^b partition of every feature.
inline Theorem1Gap theorem1_gap(const ItemSystemMDP& sys, unsigned b, double tol = 1e-12,
                                std::span<const double> weights = {}) {
    validate_identical_statistics(sys);
    const std::size_t K = sys.states.front().feature_count();
    const auto scheme = PartitionScheme::uniform(b, K);
    const auto typical = value_iteration(sys.mdp, tol);
    const auto desc = induce_descriptive_mdp(sys, scheme, weights);
    const auto induced = value_iteration(desc.mdp, tol);

    Theorem1Gap out;
    out.descriptive_states = desc.states.size();
    out.typical_values = typical.values;
    out.descriptive_values.resize(sys.states.size());
    for (std::size_t s = 0; s < sys.states.size(); ++s) {
        out.descriptive_values[s] = induced.values[desc.typical_to_descriptive[s]];
        out.gap = std::max(out.gap, std::abs(typical.values[s] - out.descriptive_values[s]));
    }
    return out;
}

/// Two items, one feature with support {0, 0.5, 1} drawn uniformly and i.i.d. each step,
/// utility = chosen item's feature.
inline ItemSystemMDP support_instance(std::size_t items = 2, double gamma = 0.9) {
    ItemFeatureDistribution dist{{{0.0}, {0.5}, {1.0}}, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
    // Probabilities sum to 1 - 2^-53 in floating point; normalise the last entry.
    dist.probabilities[2] = 1.0 - dist.probabilities[0] - dist.probabilities[1];
    return build_iid_item_system(items, dist, [](const FeatureVector& f, std::size_t) { return f[0]; }, gamma);
}

/// Opt-P for the item-sale scenario: argmax_n p_n^e g_n, ties to the lowest index.
inline TypicalAction greedy_oracle(const TypicalState& state, double exponent = 1.0) {
    if (state.items.empty()) throw DomainError("empty item-sale state");
    std::size_t best = 0;
    double value = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < state.items.size(); ++n) {
        const double p = state.items[n][0];
        const double r = (exponent == 1.0 ? p : std::pow(p, exponent)) * state.items[n][1];
        if (r > value) {
            value = r;
            best = n;
        }
    }
    return TypicalAction{best, {}};
}

// Plain-text model format, one record per line, '#' starts a comment:
//
//   descpol-mdp 1
//   gamma <g>
//   objective maximize|minimize
//   states <S>
//   actions <A>
//   items <N> features <K> decisions <D>     (optional; enables item-system operations)
//   feature <s> <f_11> ... <f_NK>            (item-major; one line per state when items given)
//   u <s> <a> <utility>
//   p <s> <a> <next> <probability>
//   unavailable <s> <a>

inline ItemSystemMDP read_tabular(std::istream& in) {
    std::string line, word;
    double gamma = 0.9;
    Objective objective = Objective::maximize;
    std::size_t S = 0, A = 0, N = 0, K = 0, D = 1;
    bool header = false, built = false;
    ItemSystemMDP sys;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& msg) {
        throw ValidationError("line " + std::to_string(line_no) + ": " + msg);
    };
    auto ensure_built = [&] {
        if (built) return;
        if (S == 0 || A == 0) fail("'states' and 'actions' must precede model records");
        sys.mdp = TabularMDP(S, A, gamma, objective);
        sys.items = N;
        sys.decision_count = D;
        if (N > 0) {
            if (N * D != A) fail("items * decisions must equal actions");
            sys.states.assign(S, TypicalState{});
        }
        built = true;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        if (!(ls >> word)) continue;
        if (!header) {
            std::string version;
            if (word != "descpol-mdp" || !(ls >> version) || version != "1") fail("missing 'descpol-mdp 1' header");
            header = true;
            continue;
        }
        if (word == "gamma") {
            if (!(ls >> gamma)) fail("bad gamma");
        } else if (word == "objective") {
            std::string o;
            ls >> o;
            if (o == "maximize") objective = Objective::maximize;
            else if (o == "minimize") objective = Objective::minimize;
            else fail("objective must be maximize or minimize");
        } else if (word == "states") {
            if (!(ls >> S)) fail("bad state count");
        } else if (word == "actions") {
            if (!(ls >> A)) fail("bad action count");
        } else if (word == "items") {
            std::string f, d;
            if (!(ls >> N >> f >> K >> d >> D) || f != "features" || d != "decisions")
                fail("expected 'items <N> features <K> decisions <D>'");
        } else if (word == "feature") {
            ensure_built();
            std::size_t s = 0;
            if (N == 0) fail("'feature' requires an 'items' line");
            if (!(ls >> s) || s >= S) fail("bad state index");
            auto& st = sys.states[s];
            st.items.assign(N, FeatureVector(K));
            for (auto& item : st.items)
                for (auto& v : item)
                    if (!(ls >> v)) fail("expected " + std::to_string(N * K) + " feature values");
        } else if (word == "u") {
            ensure_built();
            std::size_t s = 0, a = 0;
            double u = 0.0;
            if (!(ls >> s >> a >> u) || s >= S || a >= A) fail("bad utility record");
            sys.mdp.set_utility(s, a, u);
        } else if (word == "p") {
            ensure_built();
            std::size_t s = 0, a = 0, n = 0;
            double p = 0.0;
            if (!(ls >> s >> a >> n >> p) || s >= S || a >= A || n >= S) fail("bad transition record");
            sys.mdp.add_successor(s, a, n, p);
        } else if (word == "unavailable") {
            ensure_built();
            std::size_t s = 0, a = 0;
            if (!(ls >> s >> a) || s >= S || a >= A) fail("bad unavailable record");
            sys.mdp.set_available(s, a, false);
        } else {
            fail("unknown record '" + word + "'");
        }
    }
    if (!header) throw ValidationError("empty model file");
    ensure_built();
    if (N > 0)
        for (std::size_t s = 0; s < S; ++s)
            if (sys.states[s].items.empty()) throw ValidationError("state " + std::to_string(s) + " has no features");
    sys.mdp.validate();
    return sys;
}

inline void write_tabular(std::ostream& out, const ItemSystemMDP& sys) {
    const auto& m = sys.mdp;
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "descpol-mdp 1\ngamma " << num(m.gamma()) << "\nobjective " << to_string(m.objective()) << "\nstates "
        << m.state_count() << "\nactions " << m.action_count() << '\n';
    if (sys.items > 0 && !sys.states.empty()) {
        out << "items " << sys.items << " features " << sys.states.front().feature_count() << " decisions "
            << sys.decision_count << '\n';
        for (std::size_t s = 0; s < sys.states.size(); ++s) {
            out << "feature " << s;
            for (const auto& item : sys.states[s].items)
                for (double v : item) out << ' ' << num(v);
            out << '\n';
        }
    }
    for (std::size_t s = 0; s < m.state_count(); ++s)
        for (std::size_t a = 0; a < m.action_count(); ++a) {
            if (!m.available(s, a)) {
                out << "unavailable " << s << ' ' << a << '\n';
                continue;
            }
            out << "u " << s << ' ' << a << ' ' << num(m.utility(s, a)) << '\n';
            for (const auto& x : m.successors(s, a))
                out << "p " << s << ' ' << a << ' ' << x.state << ' ' << num(x.probability) << '\n';
        }
}

}  // namespace descpol
