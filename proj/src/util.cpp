#include "serenqa/util.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>

namespace serenqa {

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            break;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
    return s.substr(b, e - b);
}

void parallel_for(size_t n, unsigned workers, const std::function<void(size_t)>& body) {
    if (n == 0) return;
    if (workers <= 1 || n == 1) {
        for (size_t i = 0; i < n; ++i) body(i);
        return;
    }
    unsigned t = std::min<size_t>(workers, n);
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(t);
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex guard;
    for (unsigned w = 0; w < t; ++w) {
        pool.emplace_back([&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) break;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(guard);
                    if (!first_error) first_error = std::current_exception();
                    failed.store(true);
                    break;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace serenqa
