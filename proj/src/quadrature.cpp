#include "tubeflow/quadrature.hpp"

namespace tubeflow::quad {

std::vector<double> simpson_weights(int N, double h)
{
    if (N < 2) throw RangeError("Simpson weights need at least two cells");
    std::vector<double> w(static_cast<std::size_t>(N) + 1, 0.0);
    const int simpson_cells = (N % 2 == 0) ? N : N - 3;
    for (int i = 0; i < simpson_cells; i += 2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if (simpson_cells != N) {
        const int i = simpson_cells;
        w[i] += 3.0 * h / 8.0;
        w[i + 1] += 9.0 * h / 8.0;
        w[i + 2] += 9.0 * h / 8.0;
        w[i + 3] += 3.0 * h / 8.0;
    }
    return w;
}

} // namespace tubeflow::quad
