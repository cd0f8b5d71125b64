#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace droplet {

using Real = double;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Mat2X = Eigen::Matrix<double, 2, Eigen::Dynamic>;

// Boundary-indexed nodal values (length n_theta of the owning graph).
using BoundaryScalar = Eigen::VectorXd;

struct DropletError : std::runtime_error {
    explicit DropletError(const std::string& msg) : std::runtime_error(msg) {}
};

#define DROPLET_ERROR(NAME)                                                  \
    struct NAME : DropletError {                                             \
        explicit NAME(const std::string& msg) : DropletError(#NAME ": " + msg) {} \
    }

DROPLET_ERROR(StarShapeViolation);
DROPLET_ERROR(GridMismatch);
DROPLET_ERROR(ChartSingular);
DROPLET_ERROR(OrderTooHigh);
DROPLET_ERROR(DomainNotContained);
DROPLET_ERROR(SolverSingular);
DROPLET_ERROR(ResidualTooLarge);
DROPLET_ERROR(PowerTooHigh);
DROPLET_ERROR(EigenFailure);
DROPLET_ERROR(NonzeroMean);
DROPLET_ERROR(TaylorSignViolation);
DROPLET_ERROR(EnlargementTooLarge);
DROPLET_ERROR(CollarExit);
DROPLET_ERROR(InversionFailure);
DROPLET_ERROR(StepFailure);
DROPLET_ERROR(ConfigError);
DROPLET_ERROR(UnknownSuite);

#undef DROPLET_ERROR

// Reasons the continuation monitor can stop a run.
enum class TripReason {
    None,
    TaylorSign,
    Thickness,
    ControlA,
    ControlB,
    CollarExit,
    StarShape,
};

inline const char* to_string(TripReason r) {
    switch (r) {
        case TripReason::None: return "None";
        case TripReason::TaylorSign: return "TaylorSign";
        case TripReason::Thickness: return "Thickness";
        case TripReason::ControlA: return "ControlA";
        case TripReason::ControlB: return "ControlB";
        case TripReason::CollarExit: return "CollarExit";
        case TripReason::StarShape: return "StarShape";
    }
    return "?";
}

struct MonitorTrip : DropletError {
    TripReason reason;
    MonitorTrip(TripReason r, const std::string& msg)
        : DropletError(std::string("MonitorTrip(") + droplet::to_string(r) + "): " + msg),
          reason(r) {}
};

}  // namespace droplet
