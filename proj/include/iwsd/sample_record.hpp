#ifndef IWSD_SAMPLE_RECORD_HPP_
#define IWSD_SAMPLE_RECORD_HPP_

#include "iwsd/linalg.hpp"

namespace iwsd {

// One labeled experiment together with the sampling distribution that
// produced it. The stored pi is the distribution at collection time; every
// later reweighting must use it, not the current one.
struct SampleRecord {
  int t;       // iteration index, >= 1
  int design;  // sampled design index
  Vec label;
  Vec pi;      // sampling distribution over designs at time t
  int q;       // realized indicator index; equals design
};

}  // namespace iwsd

#endif  // IWSD_SAMPLE_RECORD_HPP_
