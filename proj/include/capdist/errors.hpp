#pragma once

#include <stdexcept>
#include <string>

namespace capdist {

/// Broad class of a failure. The CLI maps these onto exit codes 2, 3 and 4.
enum class ErrorKind { Input, Infeasible, Convergence };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define CAPDIST_DEFINE_ERROR(Name, Kind)                                          \
    class Name : public Error {                                                   \
    public:                                                                       \
        explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {}  \
    }

CAPDIST_DEFINE_ERROR(DimensionMismatch, Input);
CAPDIST_DEFINE_ERROR(NotAProbability, Input);
CAPDIST_DEFINE_ERROR(NegativeDistortion, Input);
CAPDIST_DEFINE_ERROR(ZeroProbabilityConditioning, Input);
CAPDIST_DEFINE_ERROR(AlphabetOverflow, Input);
CAPDIST_DEFINE_ERROR(AlphabetTooLarge, Input);
CAPDIST_DEFINE_ERROR(InvalidArgument, Input);
CAPDIST_DEFINE_ERROR(ParseError, Input);
CAPDIST_DEFINE_ERROR(NoZeroCostLetter, Input);
CAPDIST_DEFINE_ERROR(InfeasibleConstraints, Infeasible);
CAPDIST_DEFINE_ERROR(SolverNonmonotone, Convergence);
CAPDIST_DEFINE_ERROR(NotCertified, Convergence);

#undef CAPDIST_DEFINE_ERROR

/// Budget below the least achievable estimation cost.
class InfeasibleDistortion : public Error {
public:
    InfeasibleDistortion(const std::string& what, double d_min)
        : Error(ErrorKind::Infeasible, what), d_min_(d_min) {}
    double d_min() const noexcept { return d_min_; }

private:
    double d_min_;
};

}  // namespace capdist
