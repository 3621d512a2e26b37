#pragma once

namespace trackfuse {

/// Quantile of the chi-square distribution with `dof` degrees of freedom.
[[nodiscard]] double chi2_quantile(double dof, double p);

} // namespace trackfuse
