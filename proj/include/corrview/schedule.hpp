#pragma once

namespace corrview {

enum class Mode { kSds, kCorr };

/// Alternation rule: CORR on even iterations inside [t_start, t_end], SDS
/// everywhere else.
struct Schedule {
  int total_iters = 0;
  int t_start = 0;
  int t_end = 0;

  void validate() const;
};

Mode schedule_mode(const Schedule& sched, int t);

/// Number of CORR iterations the rule yields over the whole run.
int corr_iteration_count(const Schedule& sched);

}  // namespace corrview
