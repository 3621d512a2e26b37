#include "trackfuse/stats.hpp"

#include "trackfuse/error.hpp"

#include <boost/math/distributions/chi_squared.hpp>

namespace trackfuse {

double chi2_quantile(double dof, double p)
{
    if (!(dof > 0.0) || !(p > 0.0 && p < 1.0)) {
        throw InvalidArgument("chi-square quantile needs dof > 0 and p in (0, 1)");
    }
    return boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), p);
}

} // namespace trackfuse
