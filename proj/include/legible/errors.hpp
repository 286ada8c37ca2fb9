#pragma once

#include <stdexcept>
#include <string>

namespace legible
{

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

#define LEGIBLE_DEFINE_ERROR(Name)        \
  class Name : public Error               \
  {                                       \
  public:                                 \
    using Error::Error;                   \
  }

LEGIBLE_DEFINE_ERROR(InvalidArgument);
LEGIBLE_DEFINE_ERROR(DegeneratePath);
LEGIBLE_DEFINE_ERROR(InvalidCount);
LEGIBLE_DEFINE_ERROR(DegenerateViewpoint);
LEGIBLE_DEFINE_ERROR(PlacementFailure);
LEGIBLE_DEFINE_ERROR(UnknownEnvironment);
LEGIBLE_DEFINE_ERROR(TooManyGoals);
LEGIBLE_DEFINE_ERROR(ShapeMismatch);
LEGIBLE_DEFINE_ERROR(MissingLabels);
LEGIBLE_DEFINE_ERROR(DivergedTraining);
LEGIBLE_DEFINE_ERROR(InsufficientData);
LEGIBLE_DEFINE_ERROR(IoError);
LEGIBLE_DEFINE_ERROR(FormatError);

#undef LEGIBLE_DEFINE_ERROR

}  // namespace legible
