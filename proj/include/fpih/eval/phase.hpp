#pragma once

#include "fpih/eval/evaluate.hpp"

namespace fpih::eval {

inline constexpr int kPhaseBins = 100;
enum Phase { kApproach = 0, kContact = 1, kInsertion = 2 };

// Episode phase boundaries: approach = [0, first step with any contact flag),
// contact = [first contact, first step centered and partially inserted
// (tip >= 1 mm below the opening, laterally within clearance)), insertion =
// the remainder. The three intervals tile [0, steps) exactly.
struct PhaseSegments {
  int contact_start = 0;    // == steps when no contact occurred
  int insertion_start = 0;  // == steps when never inserted
  int steps = 0;
  bool has_contact = false;
  bool has_insertion = false;
};

PhaseSegments phase_segment(const Trajectory& traj);

// Time-normalized per-phase force-selection probability curves on a fixed
// 100-bin grid, averaged across episodes. Episodes missing a phase are
// excluded from that phase's average (and counted).
struct PhaseProfile {
  // curve[phase][axis][bin] = mean force-selection probability
  double curve[3][3][kPhaseBins] = {};
  int episodes_with_phase[3] = {0, 0, 0};
  int episodes_total = 0;
  double mean_phase_fraction[3] = {0.0, 0.0, 0.0};

  std::string to_csv() const;
};

PhaseProfile aggregate_phase_profile(const std::vector<Trajectory>& trajs);

struct SelectionContactStats {
  double in_contact_force_pct = 0.0;   // % of in-contact axis-steps with force selected
  double free_space_force_pct = 0.0;   // % of free-space axis-steps with force selected
  long in_contact_axis_steps = 0;
  long free_space_axis_steps = 0;

  nlohmann::json to_json() const;
};

SelectionContactStats selection_contact_stats(
    const std::vector<Trajectory>& trajs);

}  // namespace fpih::eval
