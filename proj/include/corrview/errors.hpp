#pragma once

#include <stdexcept>
#include <string>

namespace corrview {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// camera-geometry
struct InvalidRigError : Error { using Error::Error; };
struct OverlapViolationError : Error { using Error::Error; };
struct BehindCameraError : Error { using Error::Error; };
struct InvalidDepthError : Error { using Error::Error; };
struct DegenerateEpipolarError : Error { using Error::Error; };

// synthetic-scene
struct InsideSceneError : Error { using Error::Error; };
struct InvalidSpecError : Error { using Error::Error; };
struct EmptyForegroundError : Error { using Error::Error; };

// correlation-engine
struct EmptyInputError : Error { using Error::Error; };
struct LayerMismatchError : Error { using Error::Error; };
struct InvalidKernelError : Error { using Error::Error; };
struct CapacityError : Error { using Error::Error; };

// optimizer-schedule
struct InvalidIterationError : Error { using Error::Error; };
struct StalledCorrectionError : Error { using Error::Error; };

// cli-io
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };

}  // namespace corrview
