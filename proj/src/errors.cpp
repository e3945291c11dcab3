#include "supraflow/errors.hpp"

namespace supraflow {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::ScenarioInvalid: return "SCENARIO_INVALID";
        case ErrorCode::NumericalDivergence: return "NUMERICAL_DIVERGENCE";
        case ErrorCode::EigenNonconvergence: return "EIGEN_NONCONVERGENCE";
        case ErrorCode::IoError: return "IO_ERROR";
    }
    return "UNKNOWN";
}

}  // namespace supraflow
