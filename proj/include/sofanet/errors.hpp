#pragma once

#include <stdexcept>

namespace sofanet {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define SOFANET_DEFINE_ERROR(Name) \
  struct Name : Error {            \
    using Error::Error;            \
  }

// data pipeline
SOFANET_DEFINE_ERROR(MalformedHeader);
SOFANET_DEFINE_ERROR(RowArity);
SOFANET_DEFINE_ERROR(NonNumericCell);
SOFANET_DEFINE_ERROR(EmptyResult);
SOFANET_DEFINE_ERROR(SeriesTooShort);

// sofa engine
SOFANET_DEFINE_ERROR(NegativeInput);
SOFANET_DEFINE_ERROR(OutOfRange);
SOFANET_DEFINE_ERROR(MissingFeature);

// synthetic cohorts
SOFANET_DEFINE_ERROR(ConfigInvalid);
SOFANET_DEFINE_ERROR(IoFailure);

// neural core
SOFANET_DEFINE_ERROR(ShapeMismatch);
SOFANET_DEFINE_ERROR(LabelOutOfRange);
SOFANET_DEFINE_ERROR(LengthMismatch);
SOFANET_DEFINE_ERROR(ManifestMismatch);
SOFANET_DEFINE_ERROR(TruncatedPayload);

// alignment
SOFANET_DEFINE_ERROR(DimMismatch);
SOFANET_DEFINE_ERROR(NonpositiveBandwidth);

// protocol
SOFANET_DEFINE_ERROR(RoundDesync);
SOFANET_DEFINE_ERROR(ConfigMismatch);
SOFANET_DEFINE_ERROR(PeerClosed);

// baselines / metrics
SOFANET_DEFINE_ERROR(SingleClass);
SOFANET_DEFINE_ERROR(NoPositives);

#undef SOFANET_DEFINE_ERROR

}  // namespace sofanet
