#include "luxland/bulb_fit.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace luxland {

namespace {

// theta = (x0, y0, z0, log_power, m), axis fixed +z
using Params = Eigen::Matrix<double, 5, 1>;

double model_log(const Params& th, const Vec3& p) {
    const Vec3 d = p - Vec3(th[0], th[1], th[2]);
    const double r2 = std::max(d.squaredNorm(), 1e-12);
    const double c = std::max(d.z() / std::sqrt(r2), 1e-6);
    return th[3] + th[4] * std::log(c) - std::log(r2);
}

}  // namespace

BulbFit fit_bulb_model(const MeasuredFieldGrid& grid, double noise_floor_frac,
                       int max_iterations) {
    grid.validate();
    const double vmax = *std::max_element(grid.samples.begin(), grid.samples.end());
    const double floor = noise_floor_frac * vmax;

    std::vector<Vec3> pts;
    std::vector<double> vals;
    double wx = 0.0, wy = 0.0, wsum = 0.0;
    for (int iz = 0; iz < grid.nz; ++iz) {
        for (int iy = 0; iy < grid.ny; ++iy) {
            for (int ix = 0; ix < grid.nx; ++ix) {
                const double v = grid.at(ix, iy, iz);
                if (v <= floor) continue;
                const Vec3 p = grid.origin + Vec3(ix * grid.spacing.x(),
                                                  iy * grid.spacing.y(),
                                                  iz * grid.spacing.z());
                pts.push_back(p);
                vals.push_back(v);
                wx += v * p.x();
                wy += v * p.y();
                wsum += v;
            }
        }
    }
    if (pts.size() < 25)
        throw std::invalid_argument("fit_bulb_model: fewer than 25 samples above the noise floor");

    BulbFit fit;
    const double vmin = *std::min_element(vals.begin(), vals.end());
    if (vmax / std::max(vmin, 1e-300) < 1.2) {
        // flat field: distance decay is unobservable, report isotropic degenerate
        fit.degenerate = true;
        fit.source.position = Vec3(wx / wsum, wy / wsum, grid.origin.z() - 1.0);
        fit.source.lambert_exponent = 0.0;
        fit.source.power = vmax;
        fit.rms_rel_residual = 0.0;
        return fit;
    }

    // init: centroid of bright samples; depth from the half-intensity radius
    const double x0 = wx / wsum, y0 = wy / wsum;
    double rho_half = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (vals[i] >= 0.5 * vmax)
            rho_half = std::max(rho_half, std::hypot(pts[i].x() - x0, pts[i].y() - y0));
    }
    const double d0 = std::max(rho_half / 0.66, 0.1);
    Params th;
    th << x0, y0, grid.origin.z() - d0, std::log(vmax * d0 * d0), 1.0;

    const int n = static_cast<int>(pts.size());
    Eigen::VectorXd res(n);
    const auto residuals = [&](const Params& t, Eigen::VectorXd& r) {
        for (int i = 0; i < n; ++i) r[i] = model_log(t, pts[i]) - std::log(vals[i]);
        return 0.5 * r.squaredNorm();
    };

    double cost = residuals(th, res);
    double lambda = 1e-3;
    Eigen::MatrixXd jac(n, 5);
    Eigen::VectorXd probe(n);
    int iter = 0;
    for (; iter < max_iterations; ++iter) {
        for (int j = 0; j < 5; ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(th[j]));
            Params tp = th;
            tp[j] += h;
            for (int i = 0; i < n; ++i)
                probe[i] = model_log(tp, pts[i]) - std::log(vals[i]);
            jac.col(j) = (probe - res) / h;
        }
        const Eigen::Matrix<double, 5, 5> jtj = jac.transpose() * jac;
        const Params g = jac.transpose() * res;
        bool stepped = false;
        for (int attempt = 0; attempt < 12 && !stepped; ++attempt) {
            Eigen::Matrix<double, 5, 5> a = jtj;
            a.diagonal() += lambda * jtj.diagonal();
            const Params step = a.ldlt().solve(-g);
            Params cand = th + step;
            cand[4] = std::max(cand[4], 0.0);  // m >= 0
            Eigen::VectorXd cand_res(n);
            const double cand_cost = residuals(cand, cand_res);
            if (cand_cost < cost) {
                const double drop = cost - cand_cost;
                th = cand;
                res = cand_res;
                cost = cand_cost;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (drop < 1e-12 * (1.0 + cost)) fit.converged = true;
            } else {
                lambda *= 10.0;
            }
        }
        if (!stepped) fit.converged = true;  // no improving direction left
        if (fit.converged) break;
    }
    fit.iterations = iter;

    fit.source.position = Vec3(th[0], th[1], th[2]);
    fit.source.power = std::exp(th[3]);
    fit.source.lambert_exponent = th[4];

    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double model = std::exp(model_log(th, pts[i]));
        const double rel = (model - vals[i]) / vals[i];
        acc += rel * rel;
    }
    fit.rms_rel_residual = std::sqrt(acc / n);
    return fit;
}

}  // namespace luxland
