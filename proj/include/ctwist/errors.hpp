#pragma once

#include <stdexcept>
#include <string>

namespace ctwist {

// Base class for everything this library throws on bad input or bad state.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parameter validation (fractal geometry).
struct InvalidN : Error {
    using Error::Error;
};
struct GammaOutOfRange : Error {
    using Error::Error;
};
struct EpsOutOfRange : Error {
    using Error::Error;
};
struct NegativeStage : Error {
    using Error::Error;
};

// Scattering solver.
struct NonPositiveEnergy : Error {
    using Error::Error;
};
struct ZeroWavenumber : Error {
    using Error::Error;
};
struct NegativeWidth : Error {
    using Error::Error;
};
struct NonUnimodular : Error {
    using Error::Error;
};

// Null predictors.
struct BadCoefficients : Error {
    using Error::Error;
};
struct NegativeB : Error {
    using Error::Error;
};

// Sweep / verification.
struct WindowOutOfRange : Error {
    using Error::Error;
};

// Configuration and I/O.
struct ParseError : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

} // namespace ctwist
