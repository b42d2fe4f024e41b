// Throughput comparison of the serial and OpenMP tree reductions, plus a
// full pair-kernel evaluation at the performance-target size. Also verifies
// that both paths agree bit-for-bit.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "ustat/distribution.hpp"
#include "ustat/kernel.hpp"
#include "ustat/reduce.hpp"

namespace {

double now() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <class Fn>
double time_best(int reps, Fn&& fn, double& result) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now();
        result = fn();
        best = std::min(best, now() - t0);
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    int n = 20000;
    int reps = 3;
    if (argc > 1) n = std::atoi(argv[1]);
    if (argc > 2) reps = std::atoi(argv[2]);
    const int workers = ustat::reduce::max_workers();

    const std::vector<ustat::DistributionSpec> laws(
        static_cast<std::size_t>(n), ustat::DistributionSpec::gaussian(0.0, 1.0));
    const auto batch = ustat::sample_batch(laws, 42, 0);
    const auto kernel = ustat::KernelFamily::generic(
        [](int, int, std::span<const double> a, std::span<const double> b) {
            return a[0] * b[0];
        },
        true);
    const double pairs = static_cast<double>(n) * (static_cast<double>(n) - 1.0);

    std::printf("n=%d workers=%d reps=%d\n", n, workers, reps);
    std::printf("%-26s %12s %14s\n", "case", "seconds", "pairs/sec");

    double serial_value = 0.0, parallel_value = 0.0;
    {
        ustat::UStatOptions opts;
        opts.parallel = false;
        const double sec = time_best(
            reps, [&] { return ustat::evaluate_ustat(kernel, batch, nullptr, opts); },
            serial_value);
        std::printf("%-26s %12.4f %14.3e\n", "ustat serial", sec, pairs / sec);
    }
    {
        ustat::UStatOptions opts;
        opts.parallel = true;
        const double sec = time_best(
            reps, [&] { return ustat::evaluate_ustat(kernel, batch, nullptr, opts); },
            parallel_value);
        std::printf("%-26s %12.4f %14.3e\n", "ustat parallel", sec, pairs / sec);
    }

    // raw reduction throughput without the kernel call overhead
    const std::size_t count = static_cast<std::size_t>(pairs);
    const auto term = [&](std::size_t k) {
        return static_cast<double>(k % 1024) * 0x1.0p-10;
    };
    double red_serial = 0.0, red_parallel = 0.0;
    {
        const double sec = time_best(
            reps, [&] { return ustat::reduce::indexed_sum_serial(count, term); },
            red_serial);
        std::printf("%-26s %12.4f %14.3e\n", "reduction serial", sec,
                    static_cast<double>(count) / sec);
    }
    {
        const double sec = time_best(
            reps, [&] { return ustat::reduce::indexed_sum_parallel(count, term); },
            red_parallel);
        std::printf("%-26s %12.4f %14.3e\n", "reduction parallel", sec,
                    static_cast<double>(count) / sec);
    }

    const bool same = std::memcmp(&serial_value, &parallel_value, sizeof(double)) == 0 &&
                      std::memcmp(&red_serial, &red_parallel, sizeof(double)) == 0;
    std::printf("bitwise serial == parallel: %s\n", same ? "yes" : "NO");
    return same ? 0 : 1;
}
