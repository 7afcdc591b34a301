#include "qboost/error.hpp"

namespace qboost {

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Usage:
      return 1;
    case ErrorKind::Data:
      return 2;
    case ErrorKind::Numerical:
      return 3;
  }
  return 2;
}

}  // namespace qboost
