#pragma once

#include <string>
#include <string_view>

namespace whymine::metrics {

// Porter's suffix-stripping stemmer (1980). Input is expected lowercase.
std::string porter_stem(std::string_view word);

}  // namespace whymine::metrics
