#pragma once

#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "chstab/basis.hpp"
#include "chstab/feedback.hpp"
#include "chstab/loop.hpp"
#include "chstab/spectrum.hpp"

namespace chstab {

using Json = nlohmann::ordered_json;

Json to_json(const Vector& v);
Json to_json(const Matrix& m);
Json to_json(const PhysParams& p);
Json to_json(const ModeSet& modes);
Json to_json(const UnstableBasis& basis);
Json to_json(const AssumptionReport& report);
Json to_json(const FeedbackLaw& law);
// List of {re, im, class} plus the class counts and abscissa.
Json to_json(const SpectralReport& report);
Json to_json(const DecayFit& fit);

// Shortest decimal that round-trips is not guaranteed by iostreams, so every
// number is written with 17 significant digits.
std::string format_number(double v);

// Header t,y_norm,z_norm,norm,w1..wN followed by one row per sample.
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);

}  // namespace chstab
