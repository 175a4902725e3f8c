#pragma once

#include <stdexcept>
#include <string>

namespace circlelab {

/// Base of every typed numeric error raised by the library. `name()` is the
/// stable identifier surfaced by the CLI.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(name + ": " + what), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class PreconditionViolation : public Error {
public:
    explicit PreconditionViolation(const std::string& what) : Error("PreconditionViolation", what) {}
};

// arithmetic
class RationalDetected : public Error {
public:
    explicit RationalDetected(int step)
        : Error("RationalDetected", "Gauss iterate vanished at step " + std::to_string(step)), step(step) {}
    int step;
};

class NotBrjuno : public Error {
public:
    explicit NotBrjuno(int depth)
        : Error("NotBrjuno", "Brjuno sum flagged divergent at depth " + std::to_string(depth)) {}
};

class DepthExhausted : public Error {
public:
    DepthExhausted(int requested, int available)
        : Error("DepthExhausted", "requested depth " + std::to_string(requested) + " but only " +
                                      std::to_string(available) + " quotients are representable"),
          requested(requested), available(available) {}
    int requested;
    int available;
};

// circle maps
class NotADiffeomorphism : public Error {
public:
    explicit NotADiffeomorphism(const std::string& what) : Error("NotADiffeomorphism", what) {}
};

class DerivativeBlowup : public Error {
public:
    explicit DerivativeBlowup(int iterate)
        : Error("DerivativeBlowup", "orbit derivative overflow guard tripped at iterate " + std::to_string(iterate)) {}
};

class NoConvergence : public Error {
public:
    explicit NoConvergence(const std::string& what) : Error("NoConvergence", what) {}
};

// rotation
class PeriodicOrbitDetected : public Error {
public:
    PeriodicOrbitDetected(long long p, long long q)
        : Error("PeriodicOrbitDetected", "rotation number is rational " + std::to_string(p) + "/" + std::to_string(q)),
          p(p), q(q) {}
    long long p;
    long long q;
};

class TargetUnreachable : public Error {
public:
    explicit TargetUnreachable(const std::string& what) : Error("TargetUnreachable", what) {}
};

// kam
class SmallDivisor : public Error {
public:
    SmallDivisor(int k, double magnitude)
        : Error("SmallDivisor", "|e^{2 pi i k alpha} - 1| = " + std::to_string(magnitude) + " at mode " + std::to_string(k)),
          k(k), magnitude(magnitude) {}
    int k;
    double magnitude;
};

class Resonance : public Error {
public:
    explicit Resonance(int k) : Error("Resonance", "exact resonance at mode " + std::to_string(k)), k(k) {}
    int k;
};

class ConjugacyNotDiffeo : public Error {
public:
    explicit ConjugacyNotDiffeo(double min_dh)
        : Error("ConjugacyNotDiffeo", "min Dh = " + std::to_string(min_dh)), min_dh(min_dh) {}
    double min_dh;
};

class NotMonotone : public Error {
public:
    explicit NotMonotone(double min_dh) : Error("NotMonotone", "min Dh_n = " + std::to_string(min_dh)) {}
};

// geometry
class TilingFailure : public Error {
public:
    TilingFailure(double total, double overlap)
        : Error("TilingFailure", "partition total length " + std::to_string(total) + ", overlap " + std::to_string(overlap)),
          total(total), overlap(overlap) {}
    double total;
    double overlap;
};

class EmptyWindow : public Error {
public:
    explicit EmptyWindow(const std::string& what) : Error("EmptyWindow", what) {}
};

}  // namespace circlelab
