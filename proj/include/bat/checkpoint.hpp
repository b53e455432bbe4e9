#pragma once

#include <string>
#include <vector>

#include "bat/tensor.hpp"

namespace bat {

struct NamedTensor {
    std::string name;
    Tensor value;
};

// Binary snapshot of named parameters. Round trips bit-exactly and is
// independent of host endianness. Throws FormatError on bad magic,
// truncation, or an unopenable file.
void save_checkpoint(const std::string& path, const std::vector<NamedTensor>& params);
std::vector<NamedTensor> load_checkpoint(const std::string& path);

}  // namespace bat
