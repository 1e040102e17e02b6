#include "xfish/util.hpp"

#include <cstdlib>
#include <thread>

namespace xfish {

int worker_count() {
    const char* det = std::getenv("XFISH_DETERMINISTIC");
    if (det == nullptr || std::string(det) != "0") return 1;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace xfish
