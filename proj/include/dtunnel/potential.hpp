#ifndef DTUNNEL_POTENTIAL_HPP
#define DTUNNEL_POTENTIAL_HPP

namespace dtunnel {

/// Sign of the quadratic potential U(q) = -/+ (m omega^2 / 2) q^2.
enum class Curvature { Barrier, Well };

/// U(q) = s (m omega^2 / 2) q^2 with s = -1 for the barrier and +1 for the well.
/// The frequency itself lives in ModelParams.
struct QuadraticPotential {
    Curvature curvature{Curvature::Barrier};

    /// The signed omega^2 entering dp/dt = -U'(q) as +omega^2 m q for the barrier.
    template <typename Scalar>
    Scalar restoring_sign() const
    {
        return curvature == Curvature::Barrier ? Scalar(1) : Scalar(-1);
    }
};

inline constexpr QuadraticPotential kBarrier{Curvature::Barrier};
inline constexpr QuadraticPotential kWell{Curvature::Well};

} // namespace dtunnel

#endif // DTUNNEL_POTENTIAL_HPP
