#pragma once

#include <string>
#include <string_view>

namespace sevolab {

std::string sha256_hex(std::string_view bytes);

}  // namespace sevolab
