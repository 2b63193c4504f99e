#pragma once

namespace cavsched {

/// Longitudinal state. remaining_distance decreases while approaching and
/// goes negative once the vehicle is past the stopping line.
struct VehicleState
{
  double remaining_distance = 0.0; // m
  double velocity = 0.0;           // m/s

  bool operator==(const VehicleState&) const = default;
};

} // namespace cavsched
