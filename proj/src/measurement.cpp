#include "lcbn/measurement.hpp"

#include <cmath>
#include <string>

#include "lcbn/errors.hpp"

namespace lcbn {

const char* to_string(ModelType m) {
    switch (m) {
        case ModelType::Dina: return "dina";
        case ModelType::Gdina: return "gdina";
        case ModelType::MainEffect: return "main-effect";
    }
    return "?";
}

ModelType model_from_string(const std::string& s) {
    if (s == "dina") return ModelType::Dina;
    if (s == "gdina") return ModelType::Gdina;
    if (s == "main-effect" || s == "maineffect" || s == "acdm") return ModelType::MainEffect;
    throw InputError("unknown measurement model '" + s + "' (expected dina, gdina, or main-effect)");
}

double apply_link(LinkType link, double x) {
    if (link == LinkType::Logit) return 1.0 / (1.0 + std::exp(-x));
    if (x <= 0.0 || x >= 1.0)
        throw RangeError("identity-link response probability " + std::to_string(x) + " outside (0,1)");
    return x;
}

double theta_dina(double s, double g, PatternBits q_row, PatternBits alpha) {
    if (1.0 - s <= g)
        throw MonotonicityError("DINA item violates 1-s > g (s=" + std::to_string(s) +
                                ", g=" + std::to_string(g) + ")");
    return dominates(alpha, q_row) ? 1.0 - s : g;
}

double theta_gdina(const std::vector<double>& delta, PatternBits q_row, PatternBits alpha, LinkType link) {
    const int m = __builtin_popcount(q_row);
    if (delta.size() != (size_t{1} << m))
        throw IndexError("coefficient map must have one entry per subset of the required set");
    const std::uint32_t cls = subset_index(alpha, q_row);
    double x = 0.0;
    std::uint32_t sub = cls;
    while (true) {
        x += delta[sub];
        if (sub == 0) break;
        sub = (sub - 1) & cls;
    }
    return apply_link(link, x);
}

std::vector<double> class_theta_from_delta(const std::vector<double>& delta) {
    std::vector<double> out(delta);
    const size_t n = out.size();
    for (size_t bit = 1; bit < n; bit <<= 1)
        for (size_t c = 0; c < n; ++c)
            if (c & bit) out[c] += out[c ^ bit];
    return out;
}

std::vector<double> delta_from_class_theta(const std::vector<double>& class_theta) {
    std::vector<double> out(class_theta);
    const size_t n = out.size();
    for (size_t bit = 1; bit < n; bit <<= 1)
        for (size_t c = 0; c < n; ++c)
            if (c & bit) out[c] -= out[c ^ bit];
    return out;
}

double MeasurementParams::theta(int j1, PatternBits alpha) const {
    const size_t j0 = static_cast<size_t>(j1 - 1);
    switch (model) {
        case ModelType::Dina:
            return dominates(alpha, q[j0]) ? 1.0 - slip[j0] : guess[j0];
        case ModelType::Gdina:
            return class_theta[j0][subset_index(alpha, q[j0])];
        case ModelType::MainEffect: {
            double x = me_coef[j0][0];
            std::uint32_t cls = subset_index(alpha, q[j0]);
            int pos = 1;
            while (cls) {
                if (cls & 1u) x += me_coef[j0][static_cast<size_t>(pos)];
                cls >>= 1;
                ++pos;
            }
            return link == LinkType::Logit ? 1.0 / (1.0 + std::exp(-x)) : x;
        }
    }
    return 0.0;
}

SaturatedTheta MeasurementParams::theta_matrix(const PatternSet& a) const {
    SaturatedTheta out;
    out.J = J;
    out.patterns = a;
    out.values.resize(static_cast<size_t>(J) * a.size());
    for (int j = 1; j <= J; ++j)
        for (size_t c = 0; c < a.size(); ++c)
            out.values[static_cast<size_t>(j - 1) * a.size() + c] = theta(j, a[c]);
    return out;
}

long MeasurementParams::m_theta() const {
    switch (model) {
        case ModelType::Dina: return 2L * J;
        case ModelType::Gdina: {
            long n = 0;
            for (PatternBits r : q) n += 1L << __builtin_popcount(r);
            return n;
        }
        case ModelType::MainEffect: {
            long n = 0;
            for (PatternBits r : q) n += 1L + __builtin_popcount(r);
            return n;
        }
    }
    return 0;
}

std::vector<double> MeasurementParams::delta(int j1) const {
    const size_t j0 = static_cast<size_t>(j1 - 1);
    if (model == ModelType::Gdina) return delta_from_class_theta(class_theta[j0]);
    if (model == ModelType::MainEffect) return me_coef[j0];
    // DINA as an all-effect item: intercept g, top interaction (1-s-g)
    const int m = __builtin_popcount(q[j0]);
    std::vector<double> d(size_t{1} << m, 0.0);
    d[0] = guess[j0];
    d[d.size() - 1] += 1.0 - slip[j0] - guess[j0];
    return d;
}

long m_theta_for(ModelType model, const QMatrix& q) {
    switch (model) {
        case ModelType::Dina: return 2L * q.J();
        case ModelType::Gdina: {
            long n = 0;
            for (PatternBits r : q.rows()) n += 1L << __builtin_popcount(r);
            return n;
        }
        case ModelType::MainEffect: {
            long n = 0;
            for (PatternBits r : q.rows()) n += 1L + __builtin_popcount(r);
            return n;
        }
    }
    return 0;
}

}  // namespace lcbn
