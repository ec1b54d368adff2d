#include "ccr/active.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace ccr {

namespace {

Vector proba_at(const SoftClassifier& c, const Vector& x) { return c.predict_proba(x); }

// Indices of the k nearest rows to row i (excluding i), ties to the lowest index.
std::vector<Eigen::Index> nearest_rows(const Matrix& data, const Vector& point, Eigen::Index k, Eigen::Index skip) {
    std::vector<std::pair<double, Eigen::Index>> d;
    d.reserve(static_cast<std::size_t>(data.rows()));
    for (Eigen::Index j = 0; j < data.rows(); ++j) {
        if (j == skip) continue;
        d.emplace_back((data.row(j).transpose() - point).squaredNorm(), j);
    }
    const auto kk = static_cast<std::size_t>(std::min<Eigen::Index>(k, static_cast<Eigen::Index>(d.size())));
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(kk), d.end());
    std::vector<Eigen::Index> out(kk);
    for (std::size_t i = 0; i < kk; ++i) out[i] = d[i].second;
    return out;
}

// Rows of `candidates` with the `count` smallest priorities.
Matrix best_rows(const SoftClassifier& c, const Matrix& candidates, Eigen::Index count, ScoreKind kind) {
    Reservoir r(candidates);
    auto idx = select_from_reservoir(c, r, std::min(count, candidates.rows()), kind);
    return candidates(idx, Eigen::all);
}

}  // namespace

ScoreKind parse_score_kind(std::string_view name) {
    if (name == "uncertainty") return ScoreKind::uncertainty;
    if (name == "entropy") return ScoreKind::entropy;
    if (name == "margin") return ScoreKind::margin;
    throw ConfigError("unknown score '" + std::string(name) + "' (expected uncertainty, entropy or margin)");
}

const char* to_string(ScoreKind kind) {
    switch (kind) {
        case ScoreKind::uncertainty: return "uncertainty";
        case ScoreKind::entropy: return "entropy";
        case ScoreKind::margin: return "margin";
    }
    return "?";
}

double score_value(const Vector& p, ScoreKind kind) {
    switch (kind) {
        case ScoreKind::uncertainty:
            return p.maxCoeff();
        case ScoreKind::entropy: {
            double h = 0.0;
            for (Eigen::Index i = 0; i < p.size(); ++i) {
                if (p(i) > 0.0) h -= p(i) * std::log(p(i));
            }
            return h;
        }
        case ScoreKind::margin: {
            if (p.size() < 2) return 1.0;
            double first = -std::numeric_limits<double>::infinity();
            double second = first;
            for (Eigen::Index i = 0; i < p.size(); ++i) {
                if (p(i) > first) {
                    second = first;
                    first = p(i);
                } else if (p(i) > second) {
                    second = p(i);
                }
            }
            return first - second;
        }
    }
    return 0.0;
}

double priority(const Vector& proba, ScoreKind kind) {
    double v = score_value(proba, kind);
    return kind == ScoreKind::entropy ? -v : v;
}

AcquisitionScore score(const SoftClassifier& classifier, const Vector& x, ScoreKind kind) {
    return {kind, score_value(proba_at(classifier, x), kind)};
}

Eigen::Index Reservoir::remaining() const {
    return static_cast<Eigen::Index>(std::count(consumed.begin(), consumed.end(), false));
}

std::vector<Eigen::Index> select_from_reservoir(const SoftClassifier& classifier, Reservoir& reservoir,
                                                Eigen::Index batch, ScoreKind kind) {
    std::vector<Eigen::Index> open;
    for (std::size_t i = 0; i < reservoir.consumed.size(); ++i) {
        if (!reservoir.consumed[i]) open.push_back(static_cast<Eigen::Index>(i));
    }
    if (open.empty()) throw ConfigError("reservoir is empty");
    if (batch < 0 || batch > static_cast<Eigen::Index>(open.size())) {
        throw ConfigError("batch " + std::to_string(batch) + " exceeds the " + std::to_string(open.size()) +
                          " unconsumed reservoir points");
    }
    const Matrix p = classifier.predict_proba(Matrix(reservoir.candidates(open, Eigen::all)));
    std::vector<std::pair<double, Eigen::Index>> keyed(open.size());
    for (std::size_t k = 0; k < open.size(); ++k) {
        keyed[k] = {priority(p.row(static_cast<Eigen::Index>(k)).transpose(), kind), open[k]};
    }
    std::partial_sort(keyed.begin(), keyed.begin() + batch, keyed.end());
    std::vector<Eigen::Index> chosen(static_cast<std::size_t>(batch));
    for (Eigen::Index k = 0; k < batch; ++k) {
        chosen[static_cast<std::size_t>(k)] = keyed[static_cast<std::size_t>(k)].second;
        reservoir.consumed[static_cast<std::size_t>(keyed[static_cast<std::size_t>(k)].second)] = true;
    }
    return chosen;
}

Vector select_in_hull(const SoftClassifier& classifier, const HullDomain& domain, std::uint64_t seed,
                      const HullSearchOptions& opts) {
    if (opts.starts < 1) throw ConfigError("hull search needs at least one start");
    const Vector extent = domain.upper() - domain.lower();
    const double floor_step = 1e-6 * std::max(extent.maxCoeff(), 1e-300);
    auto objective = [&](const Vector& z) { return priority(proba_at(classifier, z), opts.kind); };

    std::optional<Vector> best;
    double best_value = std::numeric_limits<double>::infinity();
    for (int s = 0; s < opts.starts; ++s) {
        std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
        Vector z = domain.random_interior_point(rng);
        if (!domain.contains(z)) continue;
        double value = objective(z);
        Vector step = 0.25 * extent;
        for (int sweep = 0; sweep < opts.max_sweeps && step.maxCoeff() >= floor_step; ++sweep) {
            bool improved = false;
            for (Eigen::Index j = 0; j < z.size(); ++j) {
                if (!(step(j) > 0.0)) continue;
                for (double sign : {1.0, -1.0}) {
                    Vector cand = z;
                    cand(j) += sign * step(j);
                    if (!domain.contains(cand)) continue;
                    double v = objective(cand);
                    if (v < value) {
                        z = std::move(cand);
                        value = v;
                        improved = true;
                        break;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
        if (value < best_value || !best) {
            best_value = value;
            best = z;
        }
    }
    if (!best) throw Error("no hull-search start satisfied the containment check");
    return *best;
}

BoundaryPairSet boundary_pairs(const SoftClassifier& classifier, const Matrix& data, int k) {
    if (k < 1) throw ConfigError("neighbour count k must be at least 1");
    BoundaryPairSet out;
    out.k = k;
    if (data.rows() < 2) return out;
    const Labels labels = classifier.classify(data);
    std::set<std::pair<Eigen::Index, Eigen::Index>> seen;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        for (Eigen::Index j : nearest_rows(data, data.row(i).transpose(), k, i)) {
            if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) continue;
            seen.emplace(std::min(i, j), std::max(i, j));
        }
    }
    out.pairs.assign(seen.begin(), seen.end());
    return out;
}

Matrix select_boundary_pairs(const SoftClassifier& classifier, const Matrix& data, int k, const HullDomain& domain) {
    const BoundaryPairSet set = boundary_pairs(classifier, data, k);
    std::vector<std::optional<Vector>> found(set.pairs.size());
    parallel_for(set.pairs.size(), [&](std::size_t p) {
        const Vector a = data.row(set.pairs[p].first).transpose();
        const Vector b = data.row(set.pairs[p].second).transpose();
        auto at = [&](double lambda) -> Vector { return lambda * a + (1.0 - lambda) * b; };
        auto f = [&](double lambda) { return proba_at(classifier, at(lambda)).maxCoeff(); };
        // Golden-section search: two initial probes plus 29 reductions.
        const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double lo = 0.0, hi = 1.0;
        double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
        double f1 = f(x1), f2 = f(x2);
        double best_l = f1 <= f2 ? x1 : x2;
        double best_f = std::min(f1, f2);
        for (int e = 2; e < 31; ++e) {
            if (f1 <= f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = f(x1);
                if (f1 < best_f) best_f = f1, best_l = x1;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = f(x2);
                if (f2 < best_f) best_f = f2, best_l = x2;
            }
        }
        Vector z = at(best_l);
        if (domain.contains(z)) found[p] = std::move(z);
    });
    std::vector<Vector> kept;
    for (auto& z : found) {
        if (z) kept.push_back(std::move(*z));
    }
    Matrix out(static_cast<Eigen::Index>(kept.size()), data.cols());
    for (std::size_t i = 0; i < kept.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = kept[i].transpose();
    return out;
}

PerturbKind parse_perturb_kind(std::string_view name) {
    if (name == "uniform_box") return PerturbKind::uniform_box;
    if (name == "gaussian") return PerturbKind::gaussian;
    if (name == "local_covariance") return PerturbKind::local_covariance;
    throw ConfigError("unknown perturbation kernel '" + std::string(name) + "'");
}

Matrix perturb_candidates(const PerturbKernel& kernel, const Matrix& centers, std::uint64_t seed,
                          const Matrix& reference) {
    if (kernel.samples_per_center < 1) throw ConfigError("samples_per_center must be at least 1");
    if (!(kernel.width >= 0.0)) throw ConfigError("kernel width must be non-negative");
    const Eigen::Index d = centers.cols();
    const Eigen::Index n = kernel.samples_per_center;
    const Matrix& ref = reference.size() > 0 ? reference : centers;
    if (ref.cols() != d) throw DataError("reference points have the wrong dimension");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Matrix out(centers.rows() * n, d);
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
        const Vector center = centers.row(c).transpose();
        Matrix chol;
        if (kernel.kind == PerturbKind::local_covariance) {
            auto nb = nearest_rows(ref, center, kernel.neighbors, -1);
            bool ok = nb.size() >= 2;
            if (ok) {
                Matrix pts = ref(nb, Eigen::all);
                Matrix centered = pts.rowwise() - pts.colwise().mean();
                Matrix cov = centered.transpose() * centered / static_cast<double>(pts.rows() - 1);
                Eigen::LLT<Matrix> llt(cov);
                const double trace = cov.trace();
                ok = llt.info() == Eigen::Success && trace > 0.0 &&
                     llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 1e-8 * std::sqrt(trace);
                if (ok) chol = llt.matrixL();
            }
            if (!ok) warn("degenerate local covariance at center " + std::to_string(c) + "; using isotropic kernel");
        }
        for (Eigen::Index s = 0; s < n; ++s) {
            Vector z = center;
            Vector e(d);
            switch (kernel.kind) {
                case PerturbKind::uniform_box:
                    for (Eigen::Index j = 0; j < d; ++j) e(j) = unit(rng);
                    z += kernel.width * e;
                    break;
                case PerturbKind::gaussian:
                    for (Eigen::Index j = 0; j < d; ++j) e(j) = normal(rng);
                    z += kernel.width * e;
                    break;
                case PerturbKind::local_covariance:
                    for (Eigen::Index j = 0; j < d; ++j) e(j) = normal(rng);
                    z += chol.size() > 0 ? Vector(chol * e) : Vector(kernel.width * e);
                    break;
            }
            out.row(c * n + s) = z.transpose();
        }
    }
    return out;
}

Strategy parse_strategy(std::string_view name) {
    if (name == "reservoir") return Strategy::reservoir;
    if (name == "hull") return Strategy::hull;
    if (name == "boundary") return Strategy::boundary;
    if (name == "perturb") return Strategy::perturb;
    throw ConfigError("unknown strategy '" + std::string(name) + "' (expected reservoir, hull, boundary or perturb)");
}

const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::reservoir: return "reservoir";
        case Strategy::hull: return "hull";
        case Strategy::boundary: return "boundary";
        case Strategy::perturb: return "perturb";
    }
    return "?";
}

nlohmann::json to_json(const HistoryEntry& e) {
    return {{"step", e.step},
            {"n_train", e.n_train},
            {"l2", e.l2 ? nlohmann::json(*e.l2) : nlohmann::json()},
            {"r2", e.r2 ? nlohmann::json(*e.r2) : nlohmann::json()},
            {"rmse", e.rmse},
            {"strategy", e.strategy},
            {"points_added", e.points_added}};
}

std::string history_jsonl(const std::vector<HistoryEntry>& history) {
    std::ostringstream os;
    for (const auto& e : history) os << to_json(e).dump() << '\n';
    return os.str();
}

namespace {

Dataset append_rows(const Dataset& base, const Matrix& x, const Vector& y) {
    if (x.rows() == 0) return base;
    Matrix xs(base.size() + x.rows(), base.dim());
    Vector ys(base.size() + x.rows());
    xs << base.inputs(), x;
    ys << base.outputs(), y;
    return Dataset(std::move(xs), std::move(ys));
}

Matrix hull_batch(const SoftClassifier& clf, const HullDomain& domain, Eigen::Index count, std::uint64_t seed,
                  const HullSearchOptions& opts) {
    Matrix out(count, domain.dim());
    for (Eigen::Index i = 0; i < count; ++i) {
        out.row(i) = select_in_hull(clf, domain, derive_seed(seed, static_cast<std::uint64_t>(i)), opts).transpose();
    }
    return out;
}

}  // namespace

ActiveResult active_loop(const Oracle& oracle, const Dataset& initial, const ActiveConfig& cfg, int budget,
                         int refit_every) {
    if (budget < 0) throw ConfigError("budget must be non-negative");
    if (refit_every < 1) throw ConfigError("refit_every must be at least 1");
    if (cfg.regenerate_every < 1) throw ConfigError("regenerate_every must be at least 1");
    if (initial.empty()) throw DataError("active learning needs initial data");

    ActiveResult result;
    result.train = initial;
    Reservoir reservoir;
    if (cfg.strategy == Strategy::reservoir) {
        if (cfg.reservoir.rows() == 0) throw ConfigError("reservoir strategy needs candidate points");
        if (cfg.reservoir.cols() != initial.dim()) throw DataError("reservoir dimension does not match the data");
        reservoir = Reservoir(cfg.reservoir);
    }
    std::optional<HullDomain> domain;
    if (cfg.strategy != Strategy::reservoir) domain.emplace(initial.inputs());
    HullSearchOptions hull_opts = cfg.hull;
    hull_opts.kind = cfg.score;

    auto record = [&](int step, const std::string& strategy, Eigen::Index added) {
        const Dataset& eval = cfg.test ? *cfg.test : result.train;
        Metrics m = score_predictions(eval.outputs(), result.model.predict(eval.inputs()));
        result.history.push_back({step, result.train.size(), m.l2, m.r2, m.rmse, strategy, added});
    };

    result.model = ccr_fit(result.train, cfg.ccr);
    record(0, to_string(cfg.strategy), 0);

    int proposed = 0;
    int batch_index = 0;
    Eigen::Index added_since_refit = 0;
    while (proposed < budget) {
        const Eigen::Index b = std::min(refit_every, budget - proposed);
        const ClassifierPtr clf = raw_input_classifier(result.model);
        const std::uint64_t batch_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(batch_index));
        Strategy used = cfg.strategy;
        Matrix points;
        switch (cfg.strategy) {
            case Strategy::reservoir: {
                const Eigen::Index take = std::min(b, reservoir.remaining());
                if (take == 0) {
                    warn("reservoir exhausted after " + std::to_string(proposed) + " proposals");
                    break;
                }
                auto idx = select_from_reservoir(*clf, reservoir, take, cfg.score);
                result.reservoir_indices.insert(result.reservoir_indices.end(), idx.begin(), idx.end());
                points = reservoir.candidates(idx, Eigen::all);
                break;
            }
            case Strategy::hull:
                points = hull_batch(*clf, *domain, b, batch_seed, hull_opts);
                break;
            case Strategy::boundary: {
                const bool regenerate = (batch_index + 1) % cfg.regenerate_every == 0;
                Matrix found;
                if (!regenerate) found = select_boundary_pairs(*clf, result.train.inputs(), cfg.neighbors, *domain);
                if (found.rows() > 0) {
                    points = best_rows(*clf, found, b, ScoreKind::uncertainty);
                }
                if (points.rows() < b) {
                    used = points.rows() == 0 ? Strategy::hull : Strategy::boundary;
                    Matrix fill = hull_batch(*clf, *domain, b - points.rows(), batch_seed, hull_opts);
                    Matrix merged(b, result.train.dim());
                    merged << points, fill;
                    points = std::move(merged);
                }
                break;
            }
            case Strategy::perturb: {
                const BoundaryPairSet pairs = boundary_pairs(*clf, result.train.inputs(), cfg.neighbors);
                std::set<Eigen::Index> centre_rows;
                for (const auto& [i, j] : pairs.pairs) centre_rows.insert({i, j});
                Matrix centers = centre_rows.empty()
                                     ? result.train.inputs()
                                     : Matrix(result.train.inputs()(std::vector<Eigen::Index>(centre_rows.begin(), centre_rows.end()), Eigen::all));
                Matrix cand = perturb_candidates(cfg.kernel, centers, batch_seed, result.train.inputs());
                std::vector<Eigen::Index> inside;
                for (Eigen::Index i = 0; i < cand.rows(); ++i) {
                    if (domain->contains(cand.row(i).transpose())) inside.push_back(i);
                }
                if (inside.empty()) {
                    used = Strategy::hull;
                    points = hull_batch(*clf, *domain, b, batch_seed, hull_opts);
                } else {
                    points = best_rows(*clf, cand(inside, Eigen::all), b, cfg.score);
                }
                break;
            }
        }
        if (points.rows() == 0) break;
        proposed += static_cast<int>(b);
        ++batch_index;

        std::vector<Eigen::Index> ok;
        Vector labels(points.rows());
        for (Eigen::Index i = 0; i < points.rows(); ++i) {
            try {
                labels(i) = oracle(points.row(i).transpose());
                if (!std::isfinite(labels(i))) throw DataError("oracle returned a non-finite value");
                ok.push_back(i);
            } catch (const std::exception& e) {
                ++result.oracle_failures;
                warn(std::string("oracle failed on a proposed point; skipped: ") + e.what());
            }
        }
        result.train = append_rows(result.train, points(ok, Eigen::all), labels(ok));
        added_since_refit += static_cast<Eigen::Index>(ok.size());

        if (b == refit_every) {
            result.model = ccr_fit(result.train, cfg.ccr);
            record(static_cast<int>(result.history.size()), to_string(used), added_since_refit);
            added_since_refit = 0;
        }
    }
    return result;
}

bool fits_confidently(const SoftClassifier& classifier, const Vector& x, double threshold) {
    return proba_at(classifier, x).maxCoeff() >= threshold;
}

}  // namespace ccr
