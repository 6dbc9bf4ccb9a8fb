#include "evpr/error.hpp"

namespace evpr {

void rethrow_with_context(const Error& e, const std::string& context) {
    const std::string msg = context + ": " + e.what();
    switch (e.exit_code()) {
    case 2: throw ConfigError(msg);
    case 3: throw DataError(msg);
    default: throw InvariantError(msg);
    }
}

}  // namespace evpr
