#include "fdia/attacks.hpp"

#include <algorithm>
#include <cmath>

#include "fdia/error.hpp"
#include "fdia/rng.hpp"

namespace fdia {

MeterSurface::MeterSurface(const DetectorModel& model)
    : model_(model), dim_(static_cast<std::size_t>(model.input_dim())) {}

MeterSurface::MeterSurface(const DetectorModel& model, PaddingCombination leaked)
    : model_(model), leaked_(std::move(leaked)) {
    const int m = model.input_dim() - static_cast<int>(leaked_->positions.size());
    if (m < 1)
        throw DimensionError("leaked combination has more pads than the model has inputs");
    slots_ = measurement_slots(*leaked_, m);
    dim_ = static_cast<std::size_t>(m);
}

std::array<double, 2> MeterSurface::probabilities(std::span<const double> z) {
    ++queries_;
    if (!leaked_) return forward(model_, z);
    return forward(model_, pad(z, *leaked_, static_cast<int>(dim_)));
}

int MeterSurface::classify(std::span<const double> z) {
    const auto p = probabilities(z);
    return p[1] > p[0] ? 1 : 0;
}

double MeterSurface::margin(std::span<const double> z) {
    ++queries_;
    if (!leaked_) return logit_margin(model_, z);
    return logit_margin(model_, pad(z, *leaked_, static_cast<int>(dim_)));
}

std::vector<double> MeterSurface::margin_gradient(std::span<const double> z) {
    ++queries_;
    if (!leaked_) return margin_input_gradient(model_, z);
    const auto padded = pad(z, *leaked_, static_cast<int>(dim_));
    const auto full = margin_input_gradient(model_, padded);
    std::vector<double> g(dim_);
    for (std::size_t i = 0; i < dim_; ++i) g[i] = full[static_cast<std::size_t>(slots_[i])];
    return g;
}

std::vector<double> MeterSurface::loss_gradient(std::span<const double> z, int target_label) {
    ++queries_;
    if (!leaked_) return input_gradient(model_, z, target_label);
    const auto padded = pad(z, *leaked_, static_cast<int>(dim_));
    const auto full = input_gradient(model_, padded, target_label);
    std::vector<double> g(dim_);
    for (std::size_t i = 0; i < dim_; ++i) g[i] = full[static_cast<std::size_t>(slots_[i])];
    return g;
}

namespace {

void check_sources(const Dataset& sources, const AttackSpec& spec) {
    validate_spec(spec, sources.feature_dim());
    if (sources.size() == 0) throw ConfigError("attack: empty source dataset");
}

AttackResult make_result(const Dataset& sources) {
    AttackResult r;
    r.adversarial = Dataset(sources.feature_dim(), sources.meter_count());
    r.adversarial.reserve(sources.size());
    if (sources.normalization()) r.adversarial.set_normalization(*sources.normalization());
    r.adversarial.set_provenance(sources.provenance());
    return r;
}

double l2(std::span<const double> delta) {
    double s = 0.0;
    for (double v : delta) s += v * v;
    return std::sqrt(s);
}

void finalize(AttackResult& r, MeterSurface* surface, double total_l2, std::size_t n,
              std::size_t evaded) {
    r.mean_l2 = total_l2 / static_cast<double>(n);
    if (surface) {
        r.queries = surface->queries();
        r.success_rate = static_cast<double>(evaded) / static_cast<double>(n);
    } else {
        r.success_rate = std::nan("");
    }
}

} // namespace

AttackResult random_perturbation(const Dataset& sources, const AttackSpec& spec,
                                 MeterSurface* surface) {
    check_sources(sources, spec);
    AttackResult r = make_result(sources);
    double total_l2 = 0.0;
    std::size_t evaded = 0;
    std::vector<double> crafted;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        Rng rng(derive_seed(spec.seed, 20, i));
        const auto src = sources.row(i);
        crafted.assign(src.begin(), src.end());
        const double intensity = rng.uniform01();
        double sample_l2 = 0.0;
        for (int idx : spec.compromised) {
            const double d = intensity * rng.uniform(-1.0, 1.0) * spec.epsilon;
            crafted[static_cast<std::size_t>(idx)] += d;
            sample_l2 += d * d;
        }
        total_l2 += std::sqrt(sample_l2);
        if (surface && surface->classify(crafted) == 0) ++evaded;
        r.adversarial.append(crafted, 1);
    }
    finalize(r, surface, total_l2, sources.size(), evaded);
    return r;
}

std::pair<std::vector<double>, AttackResult> universal_noise(MeterSurface& surface,
                                                             const Dataset& sources,
                                                             const AttackSpec& spec) {
    check_sources(sources, spec);
    if (surface.dim() != sources.feature_dim())
        throw DimensionError("universal_noise: surface and sources disagree on dimension");

    const int iterations = effective_iterations(spec);
    const double step = effective_step(spec);
    std::vector<double> delta(sources.feature_dim(), 0.0);
    std::vector<double> shifted;

    for (int t = 0; t < iterations; ++t) {
        std::vector<double> mean_grad(sources.feature_dim(), 0.0);
        for (std::size_t i = 0; i < sources.size(); ++i) {
            const auto src = sources.row(i);
            shifted.assign(src.begin(), src.end());
            for (int idx : spec.compromised)
                shifted[static_cast<std::size_t>(idx)] += delta[static_cast<std::size_t>(idx)];
            const auto g = surface.margin_gradient(shifted);
            for (std::size_t c = 0; c < g.size(); ++c) mean_grad[c] += g[c];
        }
        // ascending the mean label-1 loss = descending the mean margin;
        // projection keeps the budget and support
        for (int idx : spec.compromised) {
            const auto c = static_cast<std::size_t>(idx);
            if (mean_grad[c] > 0.0)
                delta[c] -= step;
            else if (mean_grad[c] < 0.0)
                delta[c] += step;
            delta[c] = std::clamp(delta[c], -spec.epsilon, spec.epsilon);
        }
    }

    AttackResult r = make_result(sources);
    double sample_l2 = 0.0;
    for (int idx : spec.compromised) {
        const auto c = static_cast<std::size_t>(idx);
        sample_l2 += delta[c] * delta[c];
    }
    sample_l2 = std::sqrt(sample_l2);
    double total_l2 = 0.0;
    std::size_t evaded = 0;
    std::vector<double> crafted;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        const auto src = sources.row(i);
        crafted.assign(src.begin(), src.end());
        for (int idx : spec.compromised) {
            const auto c = static_cast<std::size_t>(idx);
            crafted[c] += delta[c];
        }
        total_l2 += sample_l2;
        if (surface.classify(crafted) == 0) ++evaded;
        r.adversarial.append(crafted, 1);
    }
    finalize(r, &surface, total_l2, sources.size(), evaded);
    return {std::move(delta), std::move(r)};
}

AttackResult iterative_gaussian(MeterSurface& surface, const Dataset& sources,
                                const AttackSpec& spec) {
    check_sources(sources, spec);
    if (surface.dim() != sources.feature_dim())
        throw DimensionError("iterative_gaussian: surface and sources disagree on dimension");

    const int iterations = effective_iterations(spec);
    const std::size_t k = spec.compromised.size();
    AttackResult r = make_result(sources);
    double total_l2 = 0.0;
    std::size_t evaded = 0;

    std::vector<double> center(k), candidate(k), best_success(k), probe;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        Rng rng(derive_seed(spec.seed, 21, i));
        const auto src = sources.row(i);

        std::fill(center.begin(), center.end(), 0.0);
        probe.assign(src.begin(), src.end());
        // margin ranking: identical ordering to label-1 probability, but it
        // keeps discriminating where softmax saturates
        double best_margin = surface.margin(probe);
        double sigma_g = spec.epsilon / 10.0;
        bool success = false;
        double best_success_l2 = 0.0;

        // at least one round always runs: an attack that injects nothing is
        // no attack, even when the source already sits below the margin
        for (int round = 0; round < iterations && (round == 0 || best_margin > 0.0); ++round) {
            bool improved = false;
            for (int j = 0; j < spec.population; ++j) {
                for (std::size_t c = 0; c < k; ++c)
                    candidate[c] = std::clamp(center[c] + rng.normal(0.0, sigma_g),
                                              -spec.epsilon, spec.epsilon);
                probe.assign(src.begin(), src.end());
                for (std::size_t c = 0; c < k; ++c)
                    probe[static_cast<std::size_t>(spec.compromised[c])] += candidate[c];
                const double margin = surface.margin(probe);
                if (margin < best_margin) {
                    best_margin = margin;
                    center = candidate;
                    improved = true;
                }
                if (margin <= 0.0) {
                    const double cl2 = l2(candidate);
                    if (!success || cl2 < best_success_l2) {
                        best_success = candidate;
                        best_success_l2 = cl2;
                    }
                    success = true;
                }
            }
            if (!improved) sigma_g = std::min(sigma_g * 1.5, spec.epsilon);
        }

        const auto& delta = success ? best_success : center;
        probe.assign(src.begin(), src.end());
        for (std::size_t c = 0; c < k; ++c)
            probe[static_cast<std::size_t>(spec.compromised[c])] += delta[c];
        total_l2 += l2(delta);
        if (surface.classify(probe) == 0) ++evaded;
        r.adversarial.append(probe, 1);
    }
    finalize(r, &surface, total_l2, sources.size(), evaded);
    return r;
}

AttackResult iterative_gradient(MeterSurface& surface, const Dataset& sources,
                                const AttackSpec& spec) {
    check_sources(sources, spec);
    if (surface.dim() != sources.feature_dim())
        throw DimensionError("iterative_gradient: surface and sources disagree on dimension");

    const int iterations = effective_iterations(spec);
    const double step = effective_step(spec);
    // sign-step descent on a relu surface stalls in local pockets; restarts
    // from random box corners are the standard counter
    constexpr int kRestarts = 10;
    AttackResult r = make_result(sources);
    double total_l2 = 0.0;
    std::size_t evaded = 0;

    const std::size_t k = spec.compromised.size();
    std::vector<double> crafted, delta(k), best(k);
    for (std::size_t i = 0; i < sources.size(); ++i) {
        const auto src = sources.row(i);
        Rng rng(derive_seed(spec.seed, 22, i));

        crafted.assign(src.begin(), src.end());
        std::fill(best.begin(), best.end(), 0.0);
        double best_margin = surface.margin(crafted);

        for (int restart = 0; restart < kRestarts; ++restart) {
            if (restart == 0)
                std::fill(delta.begin(), delta.end(), 0.0);
            else
                for (double& d : delta) d = rng.uniform(-spec.epsilon, spec.epsilon);
            crafted.assign(src.begin(), src.end());
            for (std::size_t c = 0; c < k; ++c)
                crafted[static_cast<std::size_t>(spec.compromised[c])] += delta[c];

            // anneal the sign step so the walk can settle into evasion
            // pockets narrower than the initial stride
            double stride = step;
            double restart_best = surface.margin(crafted);
            int stalled = 0;
            for (int t = 0; t < iterations; ++t) {
                const auto g = surface.margin_gradient(crafted);
                for (std::size_t c = 0; c < k; ++c) {
                    const auto idx = static_cast<std::size_t>(spec.compromised[c]);
                    double d = delta[c];
                    if (g[idx] > 0.0)
                        d -= stride;
                    else if (g[idx] < 0.0)
                        d += stride;
                    d = std::clamp(d, -spec.epsilon, spec.epsilon);
                    delta[c] = d;
                    crafted[idx] = src[idx] + d;
                }
                const double margin = surface.margin(crafted);
                if (margin < restart_best) {
                    restart_best = margin;
                    stalled = 0;
                } else if (++stalled >= 3) {
                    stride = std::max(stride * 0.5, step / 64.0);
                    stalled = 0;
                }
                if (margin < best_margin) {
                    best_margin = margin;
                    best = delta;
                }
            }
        }

        crafted.assign(src.begin(), src.end());
        for (std::size_t c = 0; c < k; ++c)
            crafted[static_cast<std::size_t>(spec.compromised[c])] += best[c];
        total_l2 += l2(best);
        if (surface.classify(crafted) == 0) ++evaded;
        r.adversarial.append(crafted, 1);
    }
    finalize(r, &surface, total_l2, sources.size(), evaded);
    return r;
}

AttackResult run_attack(MeterSurface& surface, const Dataset& sources, const AttackSpec& spec) {
    switch (spec.strategy) {
        case AttackStrategy::random_perturbation:
            return random_perturbation(sources, spec, &surface);
        case AttackStrategy::universal_noise:
            return universal_noise(surface, sources, spec).second;
        case AttackStrategy::iterative_gaussian:
            return iterative_gaussian(surface, sources, spec);
        case AttackStrategy::iterative_gradient:
            return iterative_gradient(surface, sources, spec);
    }
    throw ConfigError("run_attack: unknown strategy");
}

int pipeline_classify(const EvalPipeline& pipeline, std::span<const double> z,
                      std::uint64_t sample_index) {
    if (!pipeline.model) throw ConfigError("pipeline_classify: no model");
    if (!pipeline.scheme || pipeline.scheme->p == 0)
        return classify(*pipeline.model, z);
    Rng rng(derive_seed(pipeline.seed, 35, sample_index));
    return defended_predict(*pipeline.model, *pipeline.scheme, z, rng).label;
}

AttackOutcome evaluate_under_attack(MeterSurface& target, const EvalPipeline& pipeline,
                                    const Dataset& sources, const Dataset* normals,
                                    const AttackSpec& spec) {
    AttackOutcome outcome;
    outcome.result = run_attack(target, sources, spec);

    std::size_t flagged = 0;
    const Dataset& crafted = outcome.result.adversarial;
    for (std::size_t i = 0; i < crafted.size(); ++i)
        if (pipeline_classify(pipeline, crafted.row(i), i) == 1) ++flagged;
    outcome.detection_recall =
        static_cast<double>(flagged) / static_cast<double>(crafted.size());

    if (normals && normals->size() > 0) {
        std::size_t correct_normals = 0;
        for (std::size_t i = 0; i < normals->size(); ++i)
            if (pipeline_classify(pipeline, normals->row(i), crafted.size() + i) == 0)
                ++correct_normals;
        outcome.attacked_accuracy =
            static_cast<double>(flagged + correct_normals)
            / static_cast<double>(crafted.size() + normals->size());
    } else {
        outcome.attacked_accuracy = outcome.detection_recall;
    }
    return outcome;
}

} // namespace fdia
