#include "sedetect/series.hpp"

#include <cmath>
#include <string>

#include "sedetect/errors.hpp"

namespace sedetect {

void TimeSeries::validate() const {
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw InvalidInput("time series: sample rate must be positive and finite");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      throw InvalidInput("time series: non-finite sample at index " + std::to_string(i));
    }
  }
}

}  // namespace sedetect
