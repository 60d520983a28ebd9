#include <cstdio>
#include <ostream>

#include "pubpriv/models.hpp"

namespace pubpriv::models {

namespace {

void put(std::ostream& out, double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    out << buf;
}

void header(std::ostream& out, int d, int n, int m, double tau) {
    out << "pubpriv-dataset v1\n" << d << ' ' << n << ' ' << m << ' ';
    put(out, tau);
    out << '\n';
}

void put_row(std::ostream& out, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    for (Eigen::Index j = 0; j < row.size(); ++j) {
        if (j) out << ' ';
        put(out, row(j));
    }
    out << '\n';
}

} // namespace

void write_dataset(std::ostream& out, const MeanModelParams& params, const MeanDataset& ds) {
    header(out, params.d, params.n, params.m, params.tau);
    for (Eigen::Index i = 0; i < ds.x_priv.rows(); ++i) put_row(out, ds.x_priv.row(i));
    for (Eigen::Index i = 0; i < ds.x_pub.rows(); ++i) put_row(out, ds.x_pub.row(i));
}

// Regression rows carry the covariates, then the label, then the retained
// noise realization: d + 2 columns per row, private rows first.
void write_dataset(std::ostream& out, const RegModelParams& params, const RegDataset& ds) {
    header(out, params.d, params.n, params.m, params.tau);
    for (int i = 0; i < ds.total(); ++i) {
        for (int j = 0; j < params.d; ++j) {
            if (j) out << ' ';
            put(out, ds.x(i, j));
        }
        out << ' ';
        put(out, ds.y(i));
        out << ' ';
        put(out, ds.eta(i));
        out << '\n';
    }
}

} // namespace pubpriv::models
