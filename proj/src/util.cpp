#include "rct/util.hpp"

#include "rct/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <system_error>
#include <thread>
#include <vector>

namespace rct {

std::string format_double(double v) {
    return format_double(v, 17);
}

std::string format_double(double v, int significant_digits) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general,
                             significant_digits);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& token) {
    double v = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
        throw DomainError("not a number: '" + token + "'");
    }
    return v;
}

int worker_count() {
    const char* env = std::getenv("RCT_THREADS");
    if (env == nullptr || *env == '\0') {
        return 1;
    }
    long n = std::strtol(env, nullptr, 10);
    return static_cast<int>(std::clamp(n, 1L, 256L));
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    int workers = worker_count();
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (std::size_t t = 0; t < w; ++t) {
        pool.emplace_back([&, t]() {
            for (std::size_t i = t; i < n; i += w) {
                fn(i);
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
}

} // namespace rct
