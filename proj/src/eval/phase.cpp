#include "fpih/eval/phase.hpp"

namespace fpih::eval {

PhaseSegments phase_segment(const Trajectory& traj) {
  PhaseSegments seg;
  seg.steps = static_cast<int>(traj.steps.size());
  seg.contact_start = seg.steps;
  seg.insertion_start = seg.steps;
  for (int t = 0; t < seg.steps; ++t) {
    const auto& f = traj.steps[t].contact_flags;
    if (f[0] || f[1] || f[2]) {
      seg.contact_start = t;
      seg.has_contact = true;
      break;
    }
  }
  if (!seg.has_contact) return seg;
  for (int t = seg.contact_start; t < seg.steps; ++t) {
    const auto& s = traj.steps[t];
    const double lateral =
        (s.ee_pos.head<2>() - traj.hole_pos.head<2>()).norm();
    const bool inserted = s.ee_pos.z() <= traj.table_height - 1e-3 &&
                          lateral <= traj.clearance;
    if (inserted) {
      seg.insertion_start = t;
      seg.has_insertion = true;
      break;
    }
  }
  return seg;
}

namespace {

// Resamples the per-axis force-selection series of [begin, end) onto the
// fixed bin grid and adds it into acc.
void accumulate_phase(const Trajectory& tr, int begin, int end,
                      double acc[3][kPhaseBins]) {
  const int len = end - begin;
  if (len <= 0) return;
  for (int b = 0; b < kPhaseBins; ++b) {
    const int t = begin + std::min(len - 1, int(double(b) / kPhaseBins * len));
    for (int axis = 0; axis < 3; ++axis)
      acc[axis][b] += tr.steps[t].action.pose_selected[axis] ? 0.0 : 1.0;
  }
}

}  // namespace

PhaseProfile aggregate_phase_profile(const std::vector<Trajectory>& trajs) {
  PhaseProfile p;
  double frac_sum[3] = {0.0, 0.0, 0.0};
  for (const auto& tr : trajs) {
    if (tr.steps.empty()) continue;
    p.episodes_total += 1;
    const PhaseSegments seg = phase_segment(tr);
    const int bounds[4] = {0, seg.contact_start, seg.insertion_start,
                           seg.steps};
    for (int phase = 0; phase < 3; ++phase) {
      const int begin = bounds[phase];
      const int end = bounds[phase + 1];
      frac_sum[phase] += double(end - begin) / seg.steps;
      if (end <= begin) continue;
      double acc[3][kPhaseBins] = {};
      accumulate_phase(tr, begin, end, acc);
      for (int axis = 0; axis < 3; ++axis)
        for (int b = 0; b < kPhaseBins; ++b)
          p.curve[phase][axis][b] += acc[axis][b];
      p.episodes_with_phase[phase] += 1;
    }
  }
  for (int phase = 0; phase < 3; ++phase) {
    if (p.episodes_total > 0)
      p.mean_phase_fraction[phase] = frac_sum[phase] / p.episodes_total;
    if (p.episodes_with_phase[phase] == 0) continue;
    for (int axis = 0; axis < 3; ++axis)
      for (int b = 0; b < kPhaseBins; ++b)
        p.curve[phase][axis][b] /= p.episodes_with_phase[phase];
  }
  return p;
}

std::string PhaseProfile::to_csv() const {
  static const char* phase_names[3] = {"approach", "contact", "insertion"};
  static const char* axis_names[3] = {"x", "y", "z"};
  std::string out = "phase,axis,bin,force_selection_prob\n";
  for (int phase = 0; phase < 3; ++phase)
    for (int axis = 0; axis < 3; ++axis)
      for (int b = 0; b < kPhaseBins; ++b)
        out += std::string(phase_names[phase]) + "," + axis_names[axis] + "," +
               std::to_string(b) + "," +
               nlohmann::json(curve[phase][axis][b]).dump() + "\n";
  return out;
}

SelectionContactStats selection_contact_stats(
    const std::vector<Trajectory>& trajs) {
  SelectionContactStats st;
  long force_in_contact = 0, force_free = 0;
  for (const auto& tr : trajs) {
    for (const auto& s : tr.steps) {
      for (int axis = 0; axis < 3; ++axis) {
        const bool force_selected = !s.action.pose_selected[axis];
        if (s.contact_flags[axis]) {
          st.in_contact_axis_steps += 1;
          force_in_contact += force_selected;
        } else {
          st.free_space_axis_steps += 1;
          force_free += force_selected;
        }
      }
    }
  }
  if (st.in_contact_axis_steps > 0)
    st.in_contact_force_pct =
        100.0 * double(force_in_contact) / st.in_contact_axis_steps;
  if (st.free_space_axis_steps > 0)
    st.free_space_force_pct =
        100.0 * double(force_free) / st.free_space_axis_steps;
  return st;
}

nlohmann::json SelectionContactStats::to_json() const {
  return {{"in_contact_force_pct", in_contact_force_pct},
          {"free_space_force_pct", free_space_force_pct},
          {"in_contact_axis_steps", in_contact_axis_steps},
          {"free_space_axis_steps", free_space_axis_steps}};
}

}  // namespace fpih::eval
