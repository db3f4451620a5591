#include "pbp/hsvi.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>

#include "pbp/errors.hpp"

namespace pbp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kDedupTolerance = 1e-9;

std::uint64_t belief_hash(const Belief& b) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& e : b.entries()) {
        h = mix_seed(h ^ e.state);
        h = mix_seed(h ^ static_cast<std::uint64_t>(std::llround(e.prob * 1e8)));
    }
    return h;
}

std::uint64_t support_mask(std::span<const Belief::Entry> b) {
    std::uint64_t m = 0;
    for (const auto& e : b) m |= std::uint64_t{1} << (e.state & 63);
    return m;
}

/// min over the anchor's support of b(s) / anchor(s); 0 when b misses part of it.
double support_ratio(std::span<const Belief::Entry> b, const Belief& anchor) {
    const auto a = anchor.entries();
    if (a.size() > b.size()) return 0.0;
    double ratio = std::numeric_limits<double>::infinity();
    std::size_t j = 0;
    for (const auto& e : a) {
        while (j < b.size() && b[j].state < e.state) ++j;
        if (j == b.size() || b[j].state != e.state) return 0.0;
        ratio = std::min(ratio, b[j].prob / e.prob);
    }
    return ratio;
}

}  // namespace

double AlphaVector::dot(std::span<const Belief::Entry> b) const {
    double v = 0.0;
    for (const auto& e : b) v += values[e.state] * e.prob;
    return v;
}

double AlphaVector::dot(const Belief& b) const { return dot(b.entries()); }

void AlphaVectorSet::add(AlphaVector v) { vectors_.push_back(std::move(v)); }

std::pair<double, std::size_t> AlphaVectorSet::best(std::span<const Belief::Entry> b) const {
    double best_value = kNegInf;
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < vectors_.size(); ++i) {
        const double v = vectors_[i].dot(b);
        if (v > best_value) {
            best_value = v;
            best_index = i;
        }
    }
    return {best_value, best_index};
}

std::pair<double, std::size_t> AlphaVectorSet::best(const Belief& b) const { return best(b.entries()); }

ActionIndex AlphaVectorSet::action(const Belief& b) const {
    if (vectors_.empty()) throw ContractError("empty alpha-vector set has no greedy action");
    return vectors_[best(b).second].action;
}

bool AlphaVectorSet::add_if_improves(AlphaVector v, const Belief& at, double tol) {
    const double current = vectors_.empty() ? kNegInf : best(at).first;
    if (!(v.dot(at) > current + tol)) return false;
    std::erase_if(vectors_, [&](const AlphaVector& u) {
        for (std::size_t s = 0; s < u.values.size(); ++s) {
            if (u.values[s] > v.values[s]) return false;
        }
        return true;
    });
    vectors_.push_back(std::move(v));
    return true;
}

std::size_t AlphaVectorSet::prune_dominated() {
    const std::size_t n = vectors_.size();
    std::vector<bool> removed(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n && !removed[i]; ++j) {
            if (i == j || removed[j]) continue;
            const auto& vi = vectors_[i].values;
            const auto& vj = vectors_[j].values;
            bool dominates = true;
            bool equal = true;
            for (std::size_t s = 0; s < vi.size(); ++s) {
                if (vj[s] < vi[s]) {
                    dominates = false;
                    break;
                }
                if (vj[s] != vi[s]) equal = false;
            }
            if (dominates && (!equal || j < i)) removed[i] = true;
        }
    }
    std::vector<AlphaVector> kept;
    kept.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!removed[i]) kept.push_back(std::move(vectors_[i]));
    }
    const std::size_t count = n - kept.size();
    vectors_ = std::move(kept);
    return count;
}

SawtoothBound::SawtoothBound(std::vector<double> corners)
    : corners_(std::move(corners)), by_first_state_(corners_.size()) {
    for (double c : corners_) {
        if (!std::isfinite(c)) throw InvalidArgument("sawtooth corner values must be finite");
    }
}

double SawtoothBound::corner_value(std::span<const Belief::Entry> b) const {
    double v = 0.0;
    for (const auto& e : b) v += corners_[e.state] * e.prob;
    return v;
}

double SawtoothBound::corner_value(const Belief& b) const { return corner_value(b.entries()); }

double SawtoothBound::value_excluding(std::span<const Belief::Entry> b, std::size_t skip,
                                      const std::vector<bool>* removed) const {
    const double base = corner_value(b);
    const std::uint64_t mask = support_mask(b);
    double best = 0.0;
    for (const auto& e : b) {
        for (std::size_t i : by_first_state_[e.state]) {
            if (i == skip || (removed && (*removed)[i]) || (anchors_[i].mask & ~mask) != 0) continue;
            const double r = support_ratio(b, anchors_[i].belief);
            if (r > 0.0) best = std::min(best, r * anchors_[i].delta);
        }
    }
    return base + best;
}

double SawtoothBound::value(std::span<const Belief::Entry> b) const {
    return value_excluding(b, std::numeric_limits<std::size_t>::max());
}

double SawtoothBound::value(const Belief& b) const { return value(b.entries()); }

bool SawtoothBound::add(const Belief& b, double v, double tol) {
    if (b.empty()) return false;
    if (!(v < value(b) - tol)) return false;
    anchors_.push_back({b, v, v - corner_value(b), support_mask(b.entries())});
    by_first_state_[b.entries().front().state].push_back(anchors_.size() - 1);
    return true;
}

void SawtoothBound::rebuild_index() {
    for (auto& list : by_first_state_) list.clear();
    for (std::size_t i = 0; i < anchors_.size(); ++i) {
        by_first_state_[anchors_[i].belief.entries().front().state].push_back(i);
    }
}

std::size_t SawtoothBound::prune() {
    // An anchor whose own point is bounded by another anchor's tooth is bounded by
    // that tooth everywhere, so removing it never raises the bound.
    std::vector<bool> removed(anchors_.size(), false);
    std::size_t count = 0;
    for (std::size_t i = anchors_.size(); i-- > 0;) {
        if (value_excluding(anchors_[i].belief.entries(), i, &removed) <= anchors_[i].value) {
            removed[i] = true;
            ++count;
        }
    }
    if (count == 0) return 0;
    std::vector<Anchor> kept;
    kept.reserve(anchors_.size() - count);
    for (std::size_t i = 0; i < anchors_.size(); ++i) {
        if (!removed[i]) kept.push_back(std::move(anchors_[i]));
    }
    anchors_ = std::move(kept);
    rebuild_index();
    return count;
}

AlphaVectorSet blind_policy_bound(const VPomdpModel& model, double tol) {
    const std::size_t n = model.num_states();
    const double gamma = model.discount();
    AlphaVectorSet set;
    for (ActionIndex a = 0; a < model.num_actions(); ++a) {
        std::vector<double> v(n, model.reward_min() / (1.0 - gamma));
        std::vector<double> next(n);
        for (std::size_t sweep = 0; sweep < 1'000'000; ++sweep) {
            double residual = 0.0;
            for (StateIndex s = 0; s < n; ++s) {
                double x = 0.0;
                for (const auto& succ : model.successors(s, a)) x += succ.prob * v[succ.next];
                next[s] = model.reward(s, a) + gamma * x;
                residual = std::max(residual, std::abs(next[s] - v[s]));
            }
            v.swap(next);
            if (residual <= tol) break;
        }
        set.add({std::move(v), a});
    }
    set.prune_dominated();
    return set;
}

HsviSolver::HsviSolver(const PlanningModel& pm, PlannerEvidence evidence, HsviConfig cfg)
    : pm_(&pm), evidence_(std::move(evidence)), cfg_(cfg), stepper_(pm, evidence_), rng_(cfg.seed) {
    if (!(cfg_.eps_explore >= 0.0 && cfg_.eps_explore <= 1.0)) throw InvalidArgument("eps_explore must lie in [0,1]");
    if (!(cfg_.slack > 0.0)) throw InvalidArgument("slack must be positive");
    if (cfg_.budget.mode == HsviBudget::Mode::seconds && !(cfg_.budget.seconds > 0.0)) {
        throw InvalidArgument("time budget must be positive");
    }
    const auto& m = pm.model();
    const double gamma = m.discount();

    lower_ = blind_policy_bound(m);

    const auto q = mdp_value_iteration(m, cfg_.mdp_tolerance);
    // Value iteration from below stops short of V*; pad by the residual bound.
    const double pad = q.residual * gamma / (1.0 - gamma) + 1e-12;
    std::vector<double> corners(m.num_states());
    for (StateIndex s = 0; s < corners.size(); ++s) corners[s] = m.is_terminal(s) ? 0.0 : q.value(s) + pad;
    upper_ = SawtoothBound(std::move(corners));

    // Vision observations with identical evidence induce identical successor
    // beliefs; backups pick β once per group.
    evidence_group_.resize(pm.num_vision_obs());
    std::map<Distribution, std::size_t> groups;
    for (std::size_t v = 0; v < pm.num_vision_obs(); ++v) {
        evidence_group_[v] = groups.try_emplace(evidence_.per_vision_obs[v], v).first->second;
    }

    start_ = std::chrono::steady_clock::now();
    find_or_add_node(m.initial_belief());
}

double HsviSolver::elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

double HsviSolver::threshold(std::size_t depth) const {
    return cfg_.slack * std::pow(pm_->model().discount(), -static_cast<double>(depth));
}

std::size_t HsviSolver::find_or_add_node(Belief b) {
    const auto h = belief_hash(b);
    auto [lo, hi] = node_index_.equal_range(h);
    for (auto it = lo; it != hi; ++it) {
        if (l1_distance(nodes_[it->second].belief, b) <= kDedupTolerance) return it->second;
    }
    const std::size_t na = pm_->model().num_actions();
    BeliefNode node;
    node.lower = lower_.value(b);
    node.upper = upper_.value(b);
    node.pruned_action.assign(na, false);
    node.children.resize(na);
    node.belief = std::move(b);
    nodes_.push_back(std::move(node));
    node_index_.emplace(h, nodes_.size() - 1);
    return nodes_.size() - 1;
}

BackupResult HsviSolver::backup(const Belief& b) const {
    const auto& m = pm_->model();
    const std::size_t n = m.num_states();
    const double gamma = m.discount();
    const auto& space = m.states();
    const auto& gamma_set = lower_.vectors();
    if (gamma_set.empty()) throw ContractError("backup needs a nonempty alpha-vector set");

    BackupResult result;
    result.q.assign(m.num_actions(), kNegInf);
    std::vector<double> w(n);
    std::vector<double> covered(n);
    std::vector<double> projected;
    std::vector<double> weights;
    std::vector<double> scores;
    std::optional<std::size_t> fallback_choice;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> chosen;
    const std::size_t num_alpha = gamma_set.size();
    for (ActionIndex a = 0; a < m.num_actions(); ++a) {
        const auto predicted = stepper_.predict(b, a);
        const auto branches = stepper_.branches(predicted);
        const auto& alpha_default = gamma_set[lower_.best(predicted).second].values;

        // Γ restricted to the predicted support, stored support-major: a branch's
        // scores accumulate one support state at a time across all vectors, which
        // vectorizes and keeps each vector's summation order fixed.
        const std::size_t k = predicted.size();
        projected.resize(num_alpha * k);
        for (std::size_t i = 0; i < num_alpha; ++i) {
            for (std::size_t j = 0; j < k; ++j) projected[j * num_alpha + i] = gamma_set[i].values[predicted[j].state];
        }
        weights.resize(k);
        scores.resize(num_alpha);

        std::fill(w.begin(), w.end(), 0.0);
        std::fill(covered.begin(), covered.end(), 0.0);
        chosen.clear();
        for (const auto& br : branches) {
            const std::size_t v = pm_->vision_part(br.obs);
            const std::size_t znv = pm_->nonvision_part(br.obs);
            auto [it, fresh] = chosen.try_emplace({evidence_group_[v], znv}, 0);
            if (fresh) {
                bool positive = false;
                if (stepper_.successor_weights(predicted, br.obs, weights)) {
                    for (double x : weights) positive = positive || x > 0.0;
                    if (positive) {
                        std::fill(scores.begin(), scores.end(), 0.0);
                        for (std::size_t j = 0; j < k; ++j) {
                            const double wj = weights[j];
                            if (wj == 0.0) continue;
                            const double* col = projected.data() + j * num_alpha;
                            double* sc = scores.data();
                            for (std::size_t i = 0; i < num_alpha; ++i) sc[i] += col[i] * wj;
                        }
                        double best_value = kNegInf;
                        for (std::size_t i = 0; i < num_alpha; ++i) {
                            if (scores[i] > best_value) {
                                best_value = scores[i];
                                it->second = i;
                            }
                        }
                    } else {
                        if (!fallback_choice) fallback_choice = lower_.best(Belief::uniform(n)).second;
                        it->second = *fallback_choice;
                    }
                } else {
                    it->second = lower_.best(stepper_.next(predicted, br.obs).belief).second;
                }
            }
            const auto& beta = gamma_set[it->second].values;
            for (const auto& [c, pv] : pm_->classes_of(v)) {
                for (StateIndex s : space.states_of_class(c)) {
                    const double o = pv * m.nonvision_obs_prob(s, znv);
                    if (o == 0.0) continue;
                    w[s] += o * beta[s];
                    covered[s] += o;
                }
            }
        }
        for (StateIndex s = 0; s < n; ++s) w[s] += std::max(0.0, 1.0 - covered[s]) * alpha_default[s];

        AlphaVector beta_a;
        beta_a.action = a;
        beta_a.values.resize(n);
        for (StateIndex s = 0; s < n; ++s) {
            double x = 0.0;
            for (const auto& succ : m.successors(s, a)) x += succ.prob * w[succ.next];
            beta_a.values[s] = m.reward(s, a) + gamma * x;
        }
        result.q[a] = beta_a.dot(b);
        if (a == 0 || result.q[a] > result.vector.dot(b)) result.vector = std::move(beta_a);
    }
    return result;
}

std::pair<double, std::vector<double>> HsviSolver::upper_backup(const Belief& b) const {
    const auto& m = pm_->model();
    std::vector<double> q(m.num_actions());
    double best = kNegInf;
    for (ActionIndex a = 0; a < m.num_actions(); ++a) {
        double r = 0.0;
        for (const auto& e : b.entries()) r += e.prob * m.reward(e.state, a);
        const auto predicted = stepper_.predict(b, a);
        double future = 0.0;
        for (const auto& [p, child] : stepper_.standard_children(predicted)) future += p * upper_.value(child);
        q[a] = r + m.discount() * future;
        best = std::max(best, q[a]);
    }
    return {best, std::move(q)};
}

void HsviSolver::update_node(std::size_t id) {
    const Belief b = nodes_[id].belief;
    auto lower = backup(b);
    lower_.add_if_improves(std::move(lower.vector), b);
    auto [u, qu] = upper_backup(b);
    upper_.add(b, u);
    auto& node = nodes_[id];
    node.q_lower = std::move(lower.q);
    node.q_upper = std::move(qu);
    node.lower = lower_.value(b);
    node.upper = upper_.value(b);
}

std::size_t HsviSolver::explore_step(std::size_t node_id, std::size_t depth) {
    const auto& m = pm_->model();
    const Belief b = nodes_[node_id].belief;
    auto [u, qu] = upper_backup(b);
    upper_.add(b, u);
    nodes_[node_id].q_upper = qu;

    // Four draws per step regardless of branch so trajectories stay aligned across runs.
    const double explore_action = uniform01(rng_);
    const double pick_action = uniform01(rng_);
    const double explore_obs = uniform01(rng_);
    const double pick_obs = uniform01(rng_);

    std::vector<ActionIndex> allowed;
    for (ActionIndex a = 0; a < m.num_actions(); ++a) {
        if (!nodes_[node_id].pruned_action[a]) allowed.push_back(a);
    }
    if (allowed.empty()) return npos;
    ActionIndex a = allowed.front();
    if (explore_action < cfg_.eps_explore) {
        a = allowed[std::min(allowed.size() - 1, static_cast<std::size_t>(pick_action * allowed.size()))];
    } else {
        for (ActionIndex c : allowed) {
            if (qu[c] > qu[a]) a = c;
        }
    }

    const auto predicted = stepper_.predict(b, a);
    const auto branches = stepper_.branches(predicted);
    if (branches.empty()) return npos;

    std::size_t chosen = 0;
    std::optional<Belief> chosen_belief;
    if (explore_obs < cfg_.eps_explore) {
        chosen = std::min(branches.size() - 1, static_cast<std::size_t>(pick_obs * branches.size()));
    } else {
        const double thr = threshold(depth + 1);
        double best_score = kNegInf;
        std::map<std::pair<std::size_t, std::size_t>, double> gap_cache;
        for (std::size_t i = 0; i < branches.size(); ++i) {
            const std::size_t v = pm_->vision_part(branches[i].obs);
            const auto key = std::make_pair(evidence_group_[v], pm_->nonvision_part(branches[i].obs));
            auto it = gap_cache.find(key);
            if (it == gap_cache.end()) {
                const auto child = stepper_.next(predicted, branches[i].obs);
                it = gap_cache.emplace(key, upper_.value(child.belief) - lower_.value(child.belief)).first;
            }
            const double score = branches[i].prob * (it->second - thr);
            if (score > best_score) {
                best_score = score;
                chosen = i;
            }
        }
    }
    Belief child = stepper_.next(predicted, branches[chosen].obs).belief;
    const std::size_t child_id = find_or_add_node(std::move(child));
    auto& links = nodes_[node_id].children[a];
    const std::size_t z = branches[chosen].obs;
    auto pos = std::lower_bound(links.begin(), links.end(), z, [](const auto& l, std::size_t v) { return l.first < v; });
    if (pos == links.end() || pos->first != z) links.insert(pos, {z, child_id});
    return child_id;
}

void HsviSolver::run_trial() {
    std::vector<std::size_t> path{root()};
    for (std::size_t depth = 0;; ++depth) {
        const std::size_t id = path.back();
        const Belief& b = nodes_[id].belief;
        if (upper_.value(b) - lower_.value(b) <= threshold(depth) || depth >= cfg_.max_depth) break;
        const std::size_t child = explore_step(id, depth);
        if (child == npos) break;
        path.push_back(child);
    }
    for (auto it = path.rbegin(); it != path.rend(); ++it) update_node(*it);
    ++iteration_;
    prune(cfg_.prune_every > 0 && iteration_ % cfg_.prune_every == 0);
    const Belief& b0 = nodes_[root()].belief;
    trace_.push_back({iteration_, elapsed(), lower_.value(b0), upper_.value(b0)});
}

void HsviSolver::prune(bool full) {
    if (full) {
        lower_.prune_dominated();
        upper_.prune();
    }
    bool cut = false;
    for (auto& node : nodes_) {
        if (node.q_lower.empty() || node.q_upper.empty()) continue;
        const double best_lower = *std::max_element(node.q_lower.begin(), node.q_lower.end());
        for (ActionIndex a = 0; a < node.q_upper.size(); ++a) {
            if (!node.pruned_action[a] && node.q_upper[a] < best_lower) {
                node.pruned_action[a] = true;
                cut = cut || !node.children[a].empty();
                node.children[a].clear();
            }
        }
    }
    if (!cut) return;

    std::vector<std::size_t> remap(nodes_.size(), npos);
    std::vector<std::size_t> stack{root()};
    remap[root()] = 0;
    std::vector<std::size_t> order{root()};
    while (!stack.empty()) {
        const std::size_t id = stack.back();
        stack.pop_back();
        for (const auto& links : nodes_[id].children) {
            for (const auto& [z, child] : links) {
                if (remap[child] != npos) continue;
                remap[child] = order.size();
                order.push_back(child);
                stack.push_back(child);
            }
        }
    }
    if (order.size() == nodes_.size()) return;
    std::vector<BeliefNode> kept;
    kept.reserve(order.size());
    for (std::size_t id : order) kept.push_back(std::move(nodes_[id]));
    for (auto& node : kept) {
        for (auto& links : node.children) {
            for (auto& l : links) l.second = remap[l.second];
        }
    }
    nodes_ = std::move(kept);
    node_index_.clear();
    for (std::size_t i = 0; i < nodes_.size(); ++i) node_index_.emplace(belief_hash(nodes_[i].belief), i);
}

HsviResult HsviSolver::solve() {
    const Belief& b0 = nodes_[root()].belief;
    trace_.push_back({0, elapsed(), lower_.value(b0), upper_.value(b0)});
    bool converged = false;
    for (;;) {
        const Belief& root_belief = nodes_[root()].belief;
        if (upper_.value(root_belief) - lower_.value(root_belief) <= cfg_.slack) {
            converged = true;
            break;
        }
        if (cfg_.budget.mode == HsviBudget::Mode::iterations) {
            if (iteration_ >= cfg_.budget.iterations) break;
        } else if (elapsed() >= cfg_.budget.seconds) {
            break;
        }
        run_trial();
    }
    HsviResult r;
    r.policy = lower_;
    r.trace = trace_;
    r.lower = lower_.value(nodes_[root()].belief);
    r.upper = upper_.value(nodes_[root()].belief);
    r.iterations = iteration_;
    r.seconds = elapsed();
    r.converged = converged;
    return r;
}

HsviResult solve_hsvi(const PlanningModel& pm, const PlannerEvidence& evidence, const HsviConfig& cfg) {
    HsviSolver solver(pm, evidence, cfg);
    return solver.solve();
}

nlohmann::json policy_to_json(const AlphaVectorSet& set, const VPomdpModel& model) {
    nlohmann::json vectors = nlohmann::json::array();
    for (const auto& v : set.vectors()) {
        vectors.push_back({{"action", v.action}, {"action_name", model.data().actions.at(v.action)}, {"values", v.values}});
    }
    return {{"format", "alpha-vectors"},
            {"num_states", model.num_states()},
            {"actions", model.data().actions},
            {"vectors", vectors}};
}

AlphaVectorSet policy_from_json(const nlohmann::json& doc, const VPomdpModel& model) {
    if (doc.value("format", "") != "alpha-vectors") throw InvalidArgument("not an alpha-vector policy document");
    if (doc.at("num_states").get<std::size_t>() != model.num_states()) {
        throw InvalidArgument("policy state count does not match the model");
    }
    AlphaVectorSet set;
    for (const auto& v : doc.at("vectors")) {
        AlphaVector a{v.at("values").get<std::vector<double>>(), v.at("action").get<std::size_t>()};
        model.check_action(a.action);
        if (a.values.size() != model.num_states()) throw InvalidArgument("alpha vector has wrong length");
        set.add(std::move(a));
    }
    if (set.empty()) throw InvalidArgument("policy has no alpha vectors");
    return set;
}

void save_policy(const AlphaVectorSet& set, const VPomdpModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    out << policy_to_json(set, model).dump(1) << '\n';
}

AlphaVectorSet load_policy(const std::filesystem::path& path, const VPomdpModel& model) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot read " + path.string());
    return policy_from_json(nlohmann::json::parse(in), model);
}

void write_bound_trace(const std::vector<BoundSample>& trace, std::ostream& out) {
    out << "iteration,seconds,lower,upper\n";
    out.precision(17);
    for (const auto& t : trace) out << t.iteration << ',' << t.seconds << ',' << t.lower << ',' << t.upper << '\n';
}

}  // namespace pbp
