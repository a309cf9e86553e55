#pragma once

#include <vector>

#include "lcbn/pattern.hpp"
#include "lcbn/qmatrix.hpp"

namespace lcbn {

enum class ModelType { Dina, Gdina, MainEffect };
enum class LinkType { Identity, Logit };

const char* to_string(ModelType m);
ModelType model_from_string(const std::string& s);

double apply_link(LinkType link, double x);  // RangeError outside (0,1) under identity

// Compact index of alpha restricted to the required set sj: each required
// attribute contributes one bit, lowest mask bit first.  Index 0 is the
// all-absent class, (1<<m)-1 the all-present class.
inline std::uint32_t subset_index(PatternBits alpha, PatternBits sj) {
    std::uint32_t idx = 0;
    int pos = 0;
    PatternBits rest = sj;
    while (rest) {
        const int b = __builtin_ctz(rest);
        rest &= rest - 1;
        if ((alpha >> b) & 1u) idx |= 1u << pos;
        ++pos;
    }
    return idx;
}

// DINA response probability: 1-s if alpha dominates q_j, else g.
double theta_dina(double s, double g, PatternBits q_row, PatternBits alpha);

// All-effect (GDINA-family) response probability.  delta is indexed by the
// compact subset index over the item's required set; delta[0] is the
// intercept.  theta = link(sum of delta over subsets active in alpha).
double theta_gdina(const std::vector<double>& delta, PatternBits q_row, PatternBits alpha, LinkType link);

// zeta / Moebius transforms between per-class response probabilities and
// identity-link effect coefficients
std::vector<double> class_theta_from_delta(const std::vector<double>& delta);
std::vector<double> delta_from_class_theta(const std::vector<double>& class_theta);

// J x |A| matrix of response probabilities over an explicit pattern set
struct SaturatedTheta {
    int J = 0;
    PatternSet patterns;
    std::vector<double> values;  // row-major J x |A|

    double at(int j1, size_t col) const { return values[static_cast<size_t>(j1 - 1) * patterns.size() + col]; }
};

// Fitted measurement parameters for one of the supported models.  Carries
// the Q row masks so response probabilities can be evaluated standalone.
struct MeasurementParams {
    ModelType model = ModelType::Dina;
    LinkType link = LinkType::Identity;
    int J = 0;
    int K = 0;
    std::vector<PatternBits> q;

    std::vector<double> slip, guess;               // DINA
    std::vector<std::vector<double>> class_theta;  // GDINA: per item, per subset class
    std::vector<std::vector<double>> me_coef;      // main-effect: [delta0, per-required main effects]

    double theta(int j1, PatternBits alpha) const;
    SaturatedTheta theta_matrix(const PatternSet& a) const;

    // number of free item parameters (2J DINA, sum 2^m_j GDINA, sum 1+m_j main-effect)
    long m_theta() const;

    // GDINA effect coefficients of one item under the identity link
    std::vector<double> delta(int j1) const;
};

long m_theta_for(ModelType model, const QMatrix& q);

}  // namespace lcbn
