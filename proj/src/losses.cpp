#include "gsn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gsn/metrics.hpp"

namespace gsn {

namespace {

constexpr double kPredClampMax = 1.0 - 1e-9;

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

struct EntityViews {
    std::vector<AttentionMap> raw;
    std::vector<NormalizedMap> norm;   // filled only when the kind needs them
    std::vector<double> norm_sums;     // sum of (raw + eps) per entity
};

EntityViews slice_entities(const AttentionStack& stack, const std::vector<int>& entities, bool want_norm) {
    EntityViews out;
    out.raw.reserve(entities.size());
    for (int e : entities) {
        if (e < 0 || e >= stack.n) throw OutOfRange("loss: entity index out of range");
        out.raw.push_back(stack.slice(e));
    }
    if (want_norm) {
        out.norm.reserve(entities.size());
        out.norm_sums.reserve(entities.size());
        for (const auto& m : out.raw) {
            double s = 0.0;
            for (double x : m.v) s += x + kEpsFloor;
            out.norm_sums.push_back(s);
            out.norm.push_back(normalize_map(m, kEpsFloor));
        }
    }
    return out;
}

void check_arity(const LossKind& kind, const std::vector<int>& entities) {
    if (entities.empty()) throw FewerThanTwoEntities("loss: empty entity set");
    if (kind.is_overlap() && entities.size() < 2)
        throw FewerThanTwoEntities("loss: overlap kinds need at least two entities");
    for (size_t a = 0; a < entities.size(); ++a)
        for (size_t b = a + 1; b < entities.size(); ++b)
            if (entities[a] == entities[b]) throw ValidationError("loss: duplicate entity index");
}

// ---- baseline pieces ------------------------------------------------------

// Hard max with lexicographic tie-break: lowest entity, then row-major cell.
struct ArgMax {
    int entity = 0;
    size_t cell = 0;
    double value = -HUGE_VAL;
};

ArgMax attend_excite_argmax(const std::vector<AttentionMap>& raw) {
    // Entity whose maximum attention is smallest carries the active term.
    ArgMax out;
    double worst_max = HUGE_VAL;
    for (size_t e = 0; e < raw.size(); ++e) {
        double best = -HUGE_VAL;
        size_t best_cell = 0;
        for (size_t k = 0; k < raw[e].v.size(); ++k)
            if (raw[e].v[k] > best) {
                best = raw[e].v[k];
                best_cell = k;
            }
        if (best < worst_max) {
            worst_max = best;
            out.entity = static_cast<int>(e);
            out.cell = best_cell;
            out.value = best;
        }
    }
    return out;
}

double total_variation(const AttentionMap& a) {
    double tv = 0.0;
    for (int i = 0; i < a.h; ++i)
        for (int j = 0; j < a.w; ++j) {
            if (i + 1 < a.h) tv += std::abs(a.at(i, j) - a.at(i + 1, j));
            if (j + 1 < a.w) tv += std::abs(a.at(i, j) - a.at(i, j + 1));
        }
    return tv;
}

size_t divide_bind_argmin(const std::vector<AttentionMap>& raw) {
    size_t best = 0;
    double best_tv = HUGE_VAL;
    for (size_t e = 0; e < raw.size(); ++e) {
        const double tv = total_variation(raw[e]);
        if (tv < best_tv) {
            best_tv = tv;
            best = e;
        }
    }
    return best;
}

double predicated_clamp(double a) {
    if (a >= 1.0) throw ProbabilityOverflow("predicated loss: attention entry >= 1");
    return std::clamp(a, 0.0, kPredClampMax);
}

// log of prod_ij (1 - A[ij]) computed in log-space.
double predicated_log_miss(const AttentionMap& a) {
    double s = 0.0;
    for (double x : a.v) s += std::log1p(-predicated_clamp(x));
    return s;
}

size_t intensity_argmin(const std::vector<AttentionMap>& raw) {
    size_t best = 0;
    double best_mean = HUGE_VAL;
    for (size_t e = 0; e < raw.size(); ++e) {
        double mean = 0.0;
        for (double x : raw[e].v) mean += x;
        mean /= raw[e].cells();
        if (mean < best_mean) {
            best_mean = mean;
            best = e;
        }
    }
    return best;
}

// ---- eval -----------------------------------------------------------------

double eval_base(const LossKind& kind, const EntityViews& views) {
    switch (kind.base) {
        case LossBase::IoU:
            return iou(views.norm);
        case LossBase::NegCoM:
            return -com_distance(views.norm);
        case LossBase::NegKL:
            return -sym_kl(views.norm);
        case LossBase::NegCC:
            return -cc(views.norm);
        case LossBase::AttendExcite:
            return 1.0 - attend_excite_argmax(views.raw).value;
        case LossBase::DivideBind:
            return -total_variation(views.raw[divide_bind_argmin(views.raw)]);
        case LossBase::Predicated: {
            double loss = 0.0;
            for (const auto& m : views.raw) {
                const double log_miss = predicated_log_miss(m);
                // 1 - exp(log_miss) without cancellation.
                loss -= std::log(-std::expm1(log_miss));
            }
            return loss;
        }
    }
    throw Error("loss_eval: unreachable");
}

double eval_aux(const LossKind& kind, const EntityViews& views) {
    switch (kind.aux) {
        case AuxTerm::None:
            return 0.0;
        case AuxTerm::NegIntensity:
            return kind.lambda * -intensity(views.raw);
        case AuxTerm::Variance:
            return kind.lambda * variance(views.norm);
    }
    throw Error("loss_eval: unreachable");
}

bool needs_normalized(const LossKind& kind) { return kind.is_overlap() || kind.aux == AuxTerm::Variance; }

// ---- gradients ------------------------------------------------------------

// d(pairwise IoU)/dP for one unordered pair, scaled by `weight`.
void add_iou_pair_grad(const NormalizedMap& p, const NormalizedMap& q, double weight, std::vector<double>& gp,
                       std::vector<double>& gq) {
    for (size_t k = 0; k < p.p.size(); ++k) {
        const double denom = p.p[k] + q.p[k];
        if (denom <= 0.0) continue;  // 0/0 cell contributes 0 with zero slope
        const double inv2 = 1.0 / (denom * denom);
        gp[k] += weight * q.p[k] * q.p[k] * inv2;
        gq[k] += weight * p.p[k] * p.p[k] * inv2;
    }
}

void add_sym_kl_pair_grad(const NormalizedMap& p, const NormalizedMap& q, double weight, std::vector<double>& gp,
                          std::vector<double>& gq) {
    for (size_t k = 0; k < p.p.size(); ++k) {
        const double a = p.p[k];
        const double b = q.p[k];
        if (a <= 0.0 || b <= 0.0) throw NonPositiveEntry("sym_kl gradient: nonpositive entry");
        const double log_ratio = std::log(a / b);
        gp[k] += weight * 0.5 * (log_ratio + 1.0 - b / a);
        gq[k] += weight * 0.5 * (-log_ratio + 1.0 - a / b);
    }
}

// dL/dCoM vectors for the CoM-distance objective, one per entity.
std::vector<Point2D> com_distance_vertex_grads(const std::vector<Point2D>& coms) {
    std::vector<Point2D> g(coms.size());
    if (coms.size() == 2) {
        const double dr = coms[0].row - coms[1].row;
        const double dc = coms[0].col - coms[1].col;
        g[0] = {2.0 * dr, 2.0 * dc};
        g[1] = {-2.0 * dr, -2.0 * dc};
        return g;
    }
    const auto order = polygon_order(coms);
    const size_t n = coms.size();
    double signed2 = 0.0;
    for (size_t k = 0; k < n; ++k) {
        const Point2D& a = coms[order[k]];
        const Point2D& b = coms[order[(k + 1) % n]];
        signed2 += a.row * b.col - b.row * a.col;
    }
    const double sgn = sign_of(signed2);  // area = 0.5 * |signed2|; flat polygons get zero slope
    for (size_t k = 0; k < n; ++k) {
        const Point2D& prev = coms[order[(k + n - 1) % n]];
        const Point2D& next = coms[order[(k + 1) % n]];
        g[order[k]] = {0.5 * sgn * (next.col - prev.col), 0.5 * sgn * (prev.row - next.row)};
    }
    return g;
}

struct GradAccum {
    // dL/dA accumulated directly, and dL/dP awaiting the normalization
    // Jacobian, one flat buffer per entity.
    std::vector<std::vector<double>> raw;
    std::vector<std::vector<double>> norm;
};

void add_base_grad(const LossKind& kind, const EntityViews& views, GradAccum& acc) {
    const size_t count = views.raw.size();
    const int cells = views.raw[0].cells();
    switch (kind.base) {
        case LossBase::IoU: {
            const double weight = 2.0 / (static_cast<double>(count) * (count - 1));
            for (size_t a = 0; a < count; ++a)
                for (size_t b = a + 1; b < count; ++b)
                    add_iou_pair_grad(views.norm[a], views.norm[b], weight, acc.norm[a], acc.norm[b]);
            return;
        }
        case LossBase::NegKL: {
            const double weight = -2.0 / (static_cast<double>(count) * (count - 1));
            for (size_t a = 0; a < count; ++a)
                for (size_t b = a + 1; b < count; ++b)
                    add_sym_kl_pair_grad(views.norm[a], views.norm[b], weight, acc.norm[a], acc.norm[b]);
            return;
        }
        case LossBase::NegCoM: {
            std::vector<Point2D> coms;
            coms.reserve(count);
            for (const auto& m : views.norm) coms.push_back(center_of_mass(m));
            const auto vertex_grads = com_distance_vertex_grads(coms);
            const int w = views.norm[0].w;
            for (size_t e = 0; e < count; ++e)
                for (int k = 0; k < cells; ++k)
                    acc.norm[e][k] -= vertex_grads[e].row * (k / w) + vertex_grads[e].col * (k % w);
            return;
        }
        case LossBase::NegCC: {
            const double unit = 1.0 / cells;
            for (int k = 0; k < cells; ++k) {
                size_t winner = 0;
                double best = views.norm[0].p[k];
                for (size_t e = 1; e < count; ++e)
                    if (views.norm[e].p[k] > best) {
                        best = views.norm[e].p[k];
                        winner = e;
                    }
                acc.norm[winner][k] -= unit;
            }
            return;
        }
        case LossBase::AttendExcite: {
            const ArgMax am = attend_excite_argmax(views.raw);
            acc.raw[am.entity][am.cell] -= 1.0;
            return;
        }
        case LossBase::DivideBind: {
            const size_t e = divide_bind_argmin(views.raw);
            const AttentionMap& m = views.raw[e];
            auto& g = acc.raw[e];
            for (int i = 0; i < m.h; ++i)
                for (int j = 0; j < m.w; ++j) {
                    const size_t k = static_cast<size_t>(i) * m.w + j;
                    if (i + 1 < m.h) {
                        const double s = sign_of(m.at(i, j) - m.at(i + 1, j));
                        g[k] -= s;
                        g[k + m.w] += s;
                    }
                    if (j + 1 < m.w) {
                        const double s = sign_of(m.at(i, j) - m.at(i, j + 1));
                        g[k] -= s;
                        g[k + 1] += s;
                    }
                }
            return;
        }
        case LossBase::Predicated: {
            for (size_t e = 0; e < count; ++e) {
                const AttentionMap& m = views.raw[e];
                const double log_miss = predicated_log_miss(m);
                const double miss = std::exp(log_miss);          // prod (1 - A)
                const double hit = -std::expm1(log_miss);        // 1 - prod (1 - A)
                auto& g = acc.raw[e];
                for (size_t k = 0; k < m.v.size(); ++k) {
                    const double a = m.v[k];
                    if (a < 0.0 || a > kPredClampMax) continue;  // clamped region, zero slope
                    g[k] -= miss / (hit * (1.0 - a));
                }
            }
            return;
        }
    }
    throw Error("loss_grad_maps: unreachable");
}

void add_aux_grad(const LossKind& kind, const EntityViews& views, GradAccum& acc) {
    const size_t count = views.raw.size();
    const int cells = views.raw[0].cells();
    switch (kind.aux) {
        case AuxTerm::None:
            return;
        case AuxTerm::NegIntensity: {
            const size_t e = intensity_argmin(views.raw);
            const double unit = kind.lambda / cells;
            for (double& g : acc.raw[e]) g -= unit;
            return;
        }
        case AuxTerm::Variance: {
            // dVar/dP[k] = ||CoM - x_k||^2; the CoM's own dependence on P
            // cancels because sum_k P_k (CoM - x_k) = 0.
            const int w = views.norm[0].w;
            for (size_t e = 0; e < count; ++e) {
                const Point2D c = center_of_mass(views.norm[e]);
                for (int k = 0; k < cells; ++k) {
                    const double dr = c.row - (k / w);
                    const double dc = c.col - (k % w);
                    acc.norm[e][k] += kind.lambda / count * (dr * dr + dc * dc);
                }
            }
            return;
        }
    }
    throw Error("loss_grad_maps: unreachable");
}

}  // namespace

double loss_eval(const LossKind& kind, const AttentionStack& stack, const std::vector<int>& entities) {
    check_arity(kind, entities);
    const EntityViews views = slice_entities(stack, entities, needs_normalized(kind));
    return eval_base(kind, views) + eval_aux(kind, views);
}

MapGradient loss_grad_maps(const LossKind& kind, const AttentionStack& stack, const std::vector<int>& entities) {
    check_arity(kind, entities);
    const EntityViews views = slice_entities(stack, entities, needs_normalized(kind));
    const size_t count = entities.size();
    const size_t cells = views.raw[0].v.size();

    GradAccum acc;
    acc.raw.assign(count, std::vector<double>(cells, 0.0));
    acc.norm.assign(count, std::vector<double>(cells, 0.0));
    add_base_grad(kind, views, acc);
    add_aux_grad(kind, views, acc);

    MapGradient out;
    out.entities = entities;
    out.grads.reserve(count);
    for (size_t e = 0; e < count; ++e) {
        AttentionMap g(stack.h, stack.w);
        g.v = std::move(acc.raw[e]);
        if (needs_normalized(kind)) {
            // Normalization Jacobian: dL/dA = (gP - <gP, P>) / S.
            const auto& gp = acc.norm[e];
            const auto& p = views.norm[e].p;
            double dot = 0.0;
            for (size_t k = 0; k < cells; ++k) dot += gp[k] * p[k];
            const double inv_sum = 1.0 / views.norm_sums[e];
            for (size_t k = 0; k < cells; ++k) g.v[k] += (gp[k] - dot) * inv_sum;
        }
        out.grads.push_back(std::move(g));
    }
    return out;
}

LatentGrid grad_latent(const LossKind& kind, const LatentGrid& z, const TokenEmbeddings& tok,
                       const std::vector<int>& entities) {
    if (z.d != tok.d) throw DimMismatch("grad_latent: latent depth != key dimension");
    const AttentionStack stack = compute_attention(z, tok);
    const MapGradient mg = loss_grad_maps(kind, stack, entities);

    // Scatter per-entity map gradients into full token space.
    std::vector<const std::vector<double>*> ga(static_cast<size_t>(tok.n), nullptr);
    for (size_t e = 0; e < mg.entities.size(); ++e) ga[mg.entities[e]] = &mg.grads[e].v;

    LatentGrid gz(z.h, z.w, z.d);
    std::vector<double> gs(static_cast<size_t>(tok.n));
    for (int i = 0; i < z.h; ++i)
        for (int j = 0; j < z.w; ++j) {
            const size_t cell = static_cast<size_t>(i) * z.w + j;
            // Softmax Jacobian per cell: gs_n = A_n (gA_n - sum_m gA_m A_m).
            double mixed = 0.0;
            for (int t = 0; t < tok.n; ++t) {
                const double g = ga[t] ? (*ga[t])[cell] : 0.0;
                mixed += g * stack.at(i, j, t);
            }
            for (int t = 0; t < tok.n; ++t) {
                const double g = ga[t] ? (*ga[t])[cell] : 0.0;
                gs[t] = stack.at(i, j, t) * (g - mixed);
            }
            for (int c = 0; c < z.d; ++c) {
                double s = 0.0;
                for (int t = 0; t < tok.n; ++t) s += gs[t] * tok.keys[static_cast<size_t>(t) * tok.d + c];
                gz.at(i, j, c) = s / tok.scale;
            }
        }
    return gz;
}

std::vector<double> finite_diff(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                                double h) {
    if (!(h > 0.0)) throw ValidationError("finite_diff: h must be > 0");
    std::vector<double> g(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + h;
        const double fp = f(x);
        x[i] = orig - h;
        const double fm = f(x);
        x[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

LossKind LossKind::parse(std::string_view text) {
    const auto base_of = [](std::string_view s) -> LossBase {
        if (s == "iou") return LossBase::IoU;
        if (s == "com") return LossBase::NegCoM;
        if (s == "kl") return LossBase::NegKL;
        if (s == "cc") return LossBase::NegCC;
        if (s == "ae") return LossBase::AttendExcite;
        if (s == "db") return LossBase::DivideBind;
        if (s == "pd") return LossBase::Predicated;
        throw ParseError("unknown loss base '" + std::string(s) + "'");
    };

    LossKind kind;
    const size_t plus = text.find('+');
    if (plus == std::string_view::npos) {
        kind.base = base_of(text);
        return kind;
    }
    kind.base = base_of(text.substr(0, plus));
    if (!kind.is_overlap()) throw ParseError("combined loss requires an overlap base: '" + std::string(text) + "'");

    const std::string_view rest = text.substr(plus + 1);
    const size_t colon = rest.find(':');
    if (colon == std::string_view::npos)
        throw ParseError("combined loss needs ':<lambda>': '" + std::string(text) + "'");
    const std::string_view aux = rest.substr(0, colon);
    if (aux == "int")
        kind.aux = AuxTerm::NegIntensity;
    else if (aux == "var")
        kind.aux = AuxTerm::Variance;
    else
        throw ParseError("unknown auxiliary term '" + std::string(aux) + "'");

    const std::string lambda_text(rest.substr(colon + 1));
    size_t used = 0;
    try {
        kind.lambda = std::stod(lambda_text, &used);
    } catch (const std::exception&) {
        throw ParseError("bad lambda in '" + std::string(text) + "'");
    }
    if (used != lambda_text.size() || !(kind.lambda > 0.0))
        throw ParseError("lambda must be a positive decimal in '" + std::string(text) + "'");
    return kind;
}

std::string LossKind::to_string() const {
    std::string s;
    switch (base) {
        case LossBase::IoU: s = "iou"; break;
        case LossBase::NegCoM: s = "com"; break;
        case LossBase::NegKL: s = "kl"; break;
        case LossBase::NegCC: s = "cc"; break;
        case LossBase::AttendExcite: s = "ae"; break;
        case LossBase::DivideBind: s = "db"; break;
        case LossBase::Predicated: s = "pd"; break;
    }
    if (aux != AuxTerm::None) {
        s += aux == AuxTerm::NegIntensity ? "+int:" : "+var:";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", lambda);
        s += buf;
    }
    return s;
}

}  // namespace gsn
