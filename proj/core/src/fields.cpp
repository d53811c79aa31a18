#include "fieldscope/fields.hpp"

#include <cmath>
#include <stdexcept>

namespace fieldscope {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

CentralFieldSpec CentralFieldSpec::attractor_sqrt(Vec2 center, double b, double c, double f) {
    require(b > 0.0 && c > 0.0 && f > 0.0, "attractor-sqrt constants must be > 0");
    require(c <= f, "attractor-sqrt requires c <= f");
    CentralFieldSpec s;
    s.kind = FieldKind::AttractorSqrt;
    s.center = center;
    s.b = b;
    s.c = c;
    s.f = f;
    return s;
}

CentralFieldSpec CentralFieldSpec::attractor_gauss(Vec2 center, double b, double c, double f,
                                                   double alpha) {
    require(b > 0.0 && c > 0.0 && f > 0.0 && alpha > 0.0,
            "attractor-gauss constants must be > 0");
    require(c <= f, "attractor-gauss requires c <= f");
    CentralFieldSpec s;
    s.kind = FieldKind::AttractorGauss;
    s.center = center;
    s.b = b;
    s.c = c;
    s.f = f;
    s.alpha = alpha;
    return s;
}

CentralFieldSpec CentralFieldSpec::repeller_exp(Vec2 center, double b, double alpha, bool decay) {
    require(b > 0.0 && alpha > 0.0, "repeller-exp constants must be > 0");
    CentralFieldSpec s;
    s.kind = FieldKind::RepellerExp;
    s.center = center;
    s.b = b;
    s.alpha = alpha;
    s.decay = decay;
    return s;
}

double speed_profile(const CentralFieldSpec& spec, double d) {
    if (d < 0.0) throw std::invalid_argument("distance must be >= 0");
    switch (spec.kind) {
        case FieldKind::AttractorSqrt:
            if (d <= spec.c) return std::sqrt(d) / spec.b;
            if (d <= spec.f) return std::sqrt(spec.c) / spec.b;
            return 0.0;
        case FieldKind::AttractorGauss: {
            if (d <= spec.c) {
                const double u = d - spec.c;
                return spec.b * std::exp(-(u * u) / spec.alpha);
            }
            if (d <= spec.f) return spec.b;
            return 0.0;
        }
        case FieldKind::RepellerExp: {
            const double e = d * d / spec.alpha;
            return spec.b * std::exp(spec.decay ? -e : e);
        }
    }
    return 0.0;
}

Vec2 field_vector(const CentralFieldSpec& spec, Vec2 p) {
    const Vec2 offset = p - spec.center;
    const double d = offset.norm();
    if (d == 0.0) return {0.0, 0.0};
    const double speed = speed_profile(spec, d);
    const Vec2 outward = (1.0 / d) * offset;
    return spec.is_attractor() ? (-speed) * outward : speed * outward;
}

Vec2 superpose(const FieldSet& fields, Vec2 p) {
    Vec2 v;
    for (const auto& spec : fields) v += field_vector(spec, p);
    return v;
}

}  // namespace fieldscope
