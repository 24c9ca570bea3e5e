#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace promptpg::kernels {

enum class Backend { scalar, avx2, neon };

const char* name(Backend b);

// Backends compiled in and usable on this machine.
std::vector<Backend> available_backends();
bool is_available(Backend b);

Backend active_backend();

// Throws InvalidInput if the backend is not available here.
void select_backend(Backend b);

// Honors PROMPTPG_KERNELS=scalar|avx2|neon; otherwise picks the widest
// available backend. Called lazily on first kernel use.
void select_from_env();

// y[i] += a * x[i]
void axpy(double a, std::span<const double> x, std::span<double> y);

// x[i] *= a
void scale(std::span<double> x, double a);

double sum(std::span<const double> x);

// out[i] = min(1, max(0, z[i] - v))
void clipped_shift(std::span<const double> z, double v, std::span<double> out);

// sum_i min(1, max(0, z[i] - v))
double clipped_shift_sum(std::span<const double> z, double v);

}  // namespace promptpg::kernels
