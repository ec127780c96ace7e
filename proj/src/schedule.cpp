#include "corrview/schedule.hpp"

#include "corrview/errors.hpp"

namespace corrview {

void Schedule::validate() const {
  if (!(0 <= t_start && t_start <= t_end && t_end <= total_iters))
    throw InvalidSpecError("schedule requires 0 <= t_start <= t_end <= T");
}

Mode schedule_mode(const Schedule& sched, int t) {
  if (t < 0 || t >= sched.total_iters)
    throw InvalidIterationError("iteration outside [0, T)");
  if (t >= sched.t_start && t <= sched.t_end && t % 2 == 0) return Mode::kCorr;
  return Mode::kSds;
}

int corr_iteration_count(const Schedule& sched) {
  int lo = sched.t_start, hi = sched.t_end;
  if (hi >= sched.total_iters) hi = sched.total_iters - 1;
  if (lo > hi) return 0;
  int first_even = lo % 2 == 0 ? lo : lo + 1;
  if (first_even > hi) return 0;
  int last_even = hi % 2 == 0 ? hi : hi - 1;
  return (last_even - first_even) / 2 + 1;
}

}  // namespace corrview
