#pragma once

#include <vector>

#include "fieldscope/vec2.hpp"

namespace fieldscope {

enum class FieldKind { AttractorSqrt, AttractorGauss, RepellerExp };

/// Analytic central velocity field: the speed depends only on the distance
/// d to the center of force, and the direction is radial -- toward the
/// center for attractors, away from it for repellers.
///
/// Speed profiles:
///   attractor-sqrt    sqrt(d)/b on [0,c], plateau sqrt(c)/b on (c,f], 0 past f
///   attractor-gauss   b*exp(-(d-c)^2/alpha) on [0,c], plateau b on (c,f], 0 past f
///   repeller-exp      b*exp(-d^2/alpha); setting decay=false flips the
///                     exponent sign to the growing variant b*exp(+d^2/alpha)
struct CentralFieldSpec {
    FieldKind kind = FieldKind::AttractorSqrt;
    Vec2 center;
    double b = 1.0;      // amplitude constant
    double c = 0.0;      // slowdown onset distance (attractor kinds)
    double f = 0.0;      // influence cutoff distance (attractor kinds)
    double alpha = 1.0;  // gauss width / repeller range constant
    bool decay = true;   // repeller exponent sign switch

    bool is_attractor() const { return kind != FieldKind::RepellerExp; }

    static CentralFieldSpec attractor_sqrt(Vec2 center, double b, double c, double f);
    static CentralFieldSpec attractor_gauss(Vec2 center, double b, double c, double f,
                                            double alpha);
    static CentralFieldSpec repeller_exp(Vec2 center, double b, double alpha, bool decay = true);
};

/// Ordered set of field sources; empty means a non-interactive world.
using FieldSet = std::vector<CentralFieldSpec>;

/// Speed at distance d from the center. Rejects negative d.
double speed_profile(const CentralFieldSpec& spec, double d);

/// Velocity vector the field induces at p. Zero at the exact center,
/// where the radial direction is undefined.
Vec2 field_vector(const CentralFieldSpec& spec, Vec2 p);

/// Component-wise sum of all field vectors at p.
Vec2 superpose(const FieldSet& fields, Vec2 p);

}  // namespace fieldscope
