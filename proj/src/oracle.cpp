#include "lergo/oracle.hpp"

#include "lergo/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

namespace lergo::oracle {

namespace {

constexpr cplx kI{0.0, 1.0};

// Local index a in {0 = up, 1 = down} of site bit value.
constexpr std::uint32_t bit_of_local(int a) { return a == 0 ? 1U : 0U; }

// Full basis index from environment index e with site S set to local state a.
std::size_t insert_site(std::size_t e, int S, int a)
{
    const std::size_t p = static_cast<std::size_t>(S - 1);
    const std::size_t low = e & ((std::size_t{1} << p) - 1);
    const std::size_t high = (e >> p) << (p + 1);
    return high | (static_cast<std::size_t>(bit_of_local(a)) << p) | low;
}

void check_site(int S, int L)
{
    if (S < 1 || S > L)
        throw std::invalid_argument("site " + std::to_string(S) + " outside 1.." + std::to_string(L));
}

// psi = sum_a |a>_S (x) |psi_a>_E
std::array<std::vector<cplx>, 2> site_blocks(std::span<const cplx> amp, int L, int S)
{
    const std::size_t env = std::size_t{1} << (L - 1);
    std::array<std::vector<cplx>, 2> blocks{std::vector<cplx>(env), std::vector<cplx>(env)};
    for (std::size_t e = 0; e < env; ++e)
        for (int a = 0; a < 2; ++a)
            blocks[static_cast<std::size_t>(a)][e] = amp[insert_site(e, S, a)];
    return blocks;
}

// |a>_S (x) |v>_E
std::vector<cplx> product_vector(int L, int S, int a, std::span<const cplx> v)
{
    std::vector<cplx> out(std::size_t{1} << L, 0.0);
    for (std::size_t e = 0; e < v.size(); ++e)
        out[insert_site(e, S, a)] = v[e];
    return out;
}

cplx inner(std::span<const cplx> a, std::span<const cplx> b)
{
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += std::conj(a[i]) * b[i];
    return s;
}

std::array<Mat2, 3> pauli_matrices()
{
    Mat2 x, y, z;
    x << 0.0, 1.0, 1.0, 0.0;
    y << 0.0, -kI, kI, 0.0;
    z << 1.0, 0.0, 0.0, -1.0;
    return {x, y, z};
}

// exp(-i t sigma_axis)
Mat2 axis_rotation(int axis, double t)
{
    static const auto sigma = pauli_matrices();
    return std::cos(t) * Mat2::Identity() - kI * std::sin(t) * sigma[static_cast<std::size_t>(axis)];
}

} // namespace

CapExceeded::CapExceeded(int L, int cap)
    : std::runtime_error("L=" + std::to_string(L) + " exceeds the dense oracle cap of " + std::to_string(cap))
{
}

DenseState::DenseState(int L, std::vector<cplx> amplitudes) : L_(L), amp_(std::move(amplitudes))
{
    if (L_ < 1 || L_ > 30 || amp_.size() != (std::size_t{1} << L_))
        throw std::invalid_argument("dense state size does not match 2^L");
}

double DenseState::norm() const { return std::sqrt(std::real(inner(amp_, amp_))); }

PauliOperator::PauliOperator(int L, int cap) : L_(L)
{
    if (L < 1)
        throw std::invalid_argument("operator needs at least one site");
    if (L > cap)
        throw CapExceeded(L, cap);
}

void PauliOperator::add(const PauliString& term)
{
    const std::uint32_t sup = term.support();
    if ((term.x_mask & term.y_mask) || (term.x_mask & term.z_mask) || (term.y_mask & term.z_mask))
        throw std::invalid_argument("Pauli string masks overlap");
    if (L_ < 32 && (sup >> L_) != 0)
        throw std::invalid_argument("Pauli string acts outside the register");
    terms_.push_back(term);
}

void PauliOperator::add_exchange(int i, int j, double J)
{
    check_site(i, L_);
    check_site(j, L_);
    if (i == j)
        throw std::invalid_argument("exchange needs two distinct sites");
    const std::uint32_t m = (1U << (i - 1)) | (1U << (j - 1));
    add(PauliString{J, m, 0, 0});
    add(PauliString{J, 0, m, 0});
}

void PauliOperator::add_field(int site, double Delta)
{
    check_site(site, L_);
    add(PauliString{Delta, 0, 0, 1U << (site - 1)});
}

void PauliOperator::apply(std::span<const cplx> in, std::span<cplx> out) const
{
    const std::size_t n = dim();
    if (in.size() != n || out.size() != n)
        throw std::invalid_argument("vector size does not match operator dimension");
    std::fill(out.begin(), out.end(), cplx{0.0});
    static constexpr std::array<cplx, 4> ipow{cplx{1, 0}, cplx{0, 1}, cplx{-1, 0}, cplx{0, -1}};
    for (const auto& t : terms_) {
        const std::uint32_t flip = t.x_mask | t.y_mask;
        const std::uint32_t signed_mask = t.y_mask | t.z_mask;
        const cplx base = t.coeff * ipow[static_cast<std::size_t>(std::popcount(t.y_mask) % 4)];
        for (std::size_t b = 0; b < n; ++b) {
            const auto bb = static_cast<std::uint32_t>(b);
            const bool negative = std::popcount(~bb & signed_mask) & 1;
            out[b ^ flip] += (negative ? -base : base) * in[b];
        }
    }
}

std::vector<cplx> PauliOperator::apply(std::span<const cplx> in) const
{
    std::vector<cplx> out(dim());
    apply(in, out);
    return out;
}

double PauliOperator::expectation(const DenseState& psi) const
{
    return std::real(matrix_element(psi.amplitudes(), psi.amplitudes()));
}

cplx PauliOperator::matrix_element(std::span<const cplx> bra, std::span<const cplx> ket) const
{
    const auto hk = apply(ket);
    return inner(bra, hk);
}

Eigen::MatrixXcd PauliOperator::explicit_matrix() const
{
    if (L_ > kExplicitMatrixMaxL)
        throw CapExceeded(L_, kExplicitMatrixMaxL);
    const std::size_t n = dim();
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::vector<cplx> e(n, 0.0), col(n);
    for (std::size_t b = 0; b < n; ++b) {
        e[b] = 1.0;
        apply(e, col);
        e[b] = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            H(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(b)) = col[r];
    }
    return H;
}

PauliOperator hamiltonian_from_bonds(int L, std::span<const Bond> bonds, double Delta, int cap)
{
    PauliOperator H(L, cap);
    for (const auto& b : bonds)
        if (b.J != 0.0)
            H.add_exchange(b.i, b.j, b.J);
    if (Delta != 0.0)
        for (int s = 1; s <= L; ++s)
            H.add_field(s, Delta);
    return H;
}

PauliOperator build_hamiltonian(const CouplingTable& table, int cap)
{
    if (table.L > cap)
        throw CapExceeded(table.L, cap);
    std::vector<Bond> bonds;
    for (int i = 1; i <= table.L; ++i)
        for (int j = i + 1; j <= table.L; ++j)
            bonds.push_back({i, j, table.between(i, j)});
    return hamiltonian_from_bonds(table.L, bonds, table.Delta, cap);
}

PauliOperator build_hamiltonian(const RingSpec& spec, double Delta, int cap)
{
    if (spec.L > cap)
        throw CapExceeded(spec.L, cap);
    return build_hamiltonian(coupling_table(spec, Delta), cap);
}

DenseState embed_1x(const PureState1x& state, int cap)
{
    const int L = state.size();
    if (L > cap)
        throw CapExceeded(L, cap);
    std::vector<cplx> amp(std::size_t{1} << L, 0.0);
    for (int j = 1; j <= L; ++j)
        amp[std::size_t{1} << (j - 1)] = state.amp(j);
    return DenseState(L, std::move(amp));
}

Mat2 LocalUnitaryParams::matrix() const
{
    static const auto sigma = pauli_matrices();
    const Mat2 ns = n[0] * sigma[0] + n[1] * sigma[1] + n[2] * sigma[2];
    return std::cos(theta / 2.0) * Mat2::Identity() - kI * std::sin(theta / 2.0) * ns;
}

LocalUnitaryParams LocalUnitaryParams::from_matrix(const Mat2& U)
{
    // U = a0 1 - i (a . sigma) with real (a0, a) for U in SU(2).
    const double a0 = 0.5 * std::real(U(0, 0) + U(1, 1));
    const double ax = -0.5 * std::imag(U(0, 1) + U(1, 0));
    const double ay = 0.5 * std::real(U(1, 0) - U(0, 1));
    const double az = -0.5 * std::imag(U(0, 0) - U(1, 1));
    const double s = std::sqrt(ax * ax + ay * ay + az * az);
    LocalUnitaryParams p;
    p.theta = 2.0 * std::atan2(s, a0);
    if (p.theta >= 2.0 * kPi)
        p.theta -= 2.0 * kPi;
    if (s > 0.0)
        p.n = {ax / s, ay / s, az / s};
    return p;
}

DenseState apply_local(const DenseState& psi, int S, const Mat2& U)
{
    const int L = psi.sites();
    check_site(S, L);
    const auto in = psi.amplitudes();
    std::vector<cplx> out(in.size());
    const std::size_t env = std::size_t{1} << (L - 1);
    for (std::size_t e = 0; e < env; ++e) {
        const std::size_t up = insert_site(e, S, 0);
        const std::size_t dn = insert_site(e, S, 1);
        out[up] = U(0, 0) * in[up] + U(0, 1) * in[dn];
        out[dn] = U(1, 0) * in[up] + U(1, 1) * in[dn];
    }
    return DenseState(L, std::move(out));
}

double extracted_work(const DenseState& psi, const PauliOperator& H, int S, const LocalUnitaryParams& u)
{
    return H.expectation(psi) - H.expectation(apply_local(psi, S, u.matrix()));
}

LocalEnergyLandscape::LocalEnergyLandscape(const DenseState& psi, const PauliOperator& H, int S)
{
    const int L = psi.sites();
    check_site(S, L);
    if (H.sites() != L)
        throw std::invalid_argument("state and operator sizes differ");
    const auto blocks = site_blocks(psi.amplitudes(), L, S);
    std::array<std::array<std::vector<cplx>, 2>, 2> kets;
    std::array<std::array<std::vector<cplx>, 2>, 2> h_kets;
    for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l) {
            kets[j][l] = product_vector(L, S, j, blocks[static_cast<std::size_t>(l)]);
            h_kets[j][l] = H.apply(kets[j][l]);
        }
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l)
                    q_[i][j][k][l] = inner(kets[i][k], h_kets[j][l]);
    e0_ = energy_after(Mat2::Identity());
}

double LocalEnergyLandscape::energy_after(const Mat2& U) const
{
    cplx e = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l)
                    e += std::conj(U(i, k)) * U(j, l) * q_[i][j][k][l];
    return std::real(e);
}

namespace {

struct GridPoint {
    double work = -std::numeric_limits<double>::infinity();
    int a = 0, b = 0, c = 0;
};

LocalUnitaryParams grid_params(const GridResolution& g, int a, int b, int c)
{
    const double theta = 2.0 * kPi * a / g.theta;
    const double polar = g.polar > 1 ? kPi * b / (g.polar - 1) : 0.5 * kPi;
    const double azimuth = 2.0 * kPi * c / g.azimuth;
    return {theta,
            {std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth), std::cos(polar)}};
}

// Maximize f on [lo, hi]; returns the best abscissa seen.
template <class F>
double golden_section_max(F&& f, double lo, double hi, double tol)
{
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - invphi * (hi - lo);
    double x2 = lo + invphi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > tol) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = f(x1);
        }
    }
    return f1 > f2 ? x1 : x2;
}

} // namespace

BruteForceResult brute_force_ergotropy(const DenseState& psi, const PauliOperator& H, int S, GridResolution grid)
{
    if (grid.theta < 1 || grid.polar < 1 || grid.azimuth < 1)
        throw std::invalid_argument("grid resolution must be positive");
    const LocalEnergyLandscape land(psi, H, S);

    // Chunks are merged in index order with a strict comparison, so ties go to
    // the lexicographically first (theta, polar, azimuth) index.
    const std::size_t chunks = worker_count();
    std::vector<GridPoint> partial(chunks);
    parallel_chunks(static_cast<std::size_t>(grid.theta), chunks, [&](std::size_t begin, std::size_t end, std::size_t c) {
        GridPoint best;
        for (auto a = static_cast<int>(begin); a < static_cast<int>(end); ++a)
            for (int b = 0; b < grid.polar; ++b)
                for (int cc = 0; cc < grid.azimuth; ++cc) {
                    const double w = land.work(grid_params(grid, a, b, cc).matrix());
                    if (w > best.work)
                        best = {w, a, b, cc};
                }
        partial[c] = best;
    });
    GridPoint best;
    for (const auto& p : partial)
        if (p.work > best.work)
            best = p;

    BruteForceResult result;
    result.best_grid_work = best.work;
    Mat2 U = grid_params(grid, best.a, best.b, best.c).matrix();
    double f_best = best.work;

    double h = 2.0 * kPi / std::max({grid.theta, 2 * grid.polar, grid.azimuth});
    int cycles = 0;
    constexpr int kMaxCycles = 2000;
    while (h > 1e-10 && cycles < kMaxCycles) {
        double moved = 0.0;
        for (int axis = 0; axis < 3; ++axis) {
            const auto along = [&](double t) { return land.work(U * axis_rotation(axis, t)); };
            const double t = golden_section_max(along, -h, h, 1e-3 * h);
            const double f = along(t);
            if (f > f_best) {
                f_best = f;
                U = U * axis_rotation(axis, t);
                moved = std::max(moved, std::abs(t));
            }
        }
        if (moved < 0.25 * h)
            h *= 0.5;
        ++cycles;
    }
    result.work = f_best;
    result.argmax = LocalUnitaryParams::from_matrix(U);
    result.refinement_cycles = cycles;
    return result;
}

SiteDecomposition split_at_site(const PauliOperator& H, int S)
{
    const int L = H.sites();
    check_site(S, L);
    SiteDecomposition parts{PauliOperator(L, L), PauliOperator(L, L), PauliOperator(L, L)};
    const std::uint32_t site_bit = 1U << (S - 1);
    for (const auto& t : H.terms()) {
        const std::uint32_t sup = t.support();
        if (!(sup & site_bit))
            parts.H_E.add(t);
        else if (sup == site_bit)
            parts.H_S.add(t);
        else
            parts.V_SE.add(t);
    }
    return parts;
}

MMatrix3 m_matrix_direct(const DenseState& psi, const PauliOperator& H, const SiteDecomposition& parts, int S)
{
    const int L = psi.sites();
    check_site(S, L);
    if (H.sites() != L || parts.H_S.sites() != L || parts.H_E.sites() != L || parts.V_SE.sites() != L)
        throw std::invalid_argument("decomposition and state sizes differ");
    const std::uint32_t site_bit = 1U << (S - 1);
    for (const auto& t : parts.H_S.terms())
        if ((t.support() & ~site_bit) != 0)
            throw std::invalid_argument("H_S acts outside the subsystem");
    for (const auto& t : parts.H_E.terms())
        if (t.support() & site_bit)
            throw std::invalid_argument("H_E acts on the subsystem");

    // H_S + H_E + V_SE must reproduce H on the state and on two fixed random vectors.
    {
        std::mt19937_64 rng(0x5eed);
        std::normal_distribution<double> gauss;
        std::vector<std::vector<cplx>> probes{std::vector<cplx>(psi.amplitudes().begin(), psi.amplitudes().end())};
        for (int r = 0; r < 2; ++r) {
            std::vector<cplx> v(psi.dim());
            for (auto& x : v)
                x = {gauss(rng), gauss(rng)};
            probes.push_back(std::move(v));
        }
        for (const auto& v : probes) {
            const auto full = H.apply(v);
            const auto a = parts.H_S.apply(v);
            const auto b = parts.H_E.apply(v);
            const auto c = parts.V_SE.apply(v);
            double scale = 1.0, diff = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) {
                scale = std::max(scale, std::abs(full[i]));
                diff = std::max(diff, std::abs(full[i] - a[i] - b[i] - c[i]));
            }
            if (diff > 1e-10 * scale)
                throw std::invalid_argument("decomposition does not sum to H");
        }
    }

    const auto sigma = pauli_matrices();
    const auto blocks = site_blocks(psi.amplitudes(), L, S);

    // rho_S(a, b) = <psi_b|psi_a>
    Mat2 rho_s;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            rho_s(a, b) = inner(blocks[static_cast<std::size_t>(b)], blocks[static_cast<std::size_t>(a)]);

    // 2x2 single-site matrix of H_S, read off with the environment all down.
    Mat2 h_s;
    {
        const std::vector<cplx> env0 = [&] {
            std::vector<cplx> v(std::size_t{1} << (L - 1), 0.0);
            v[0] = 1.0;
            return v;
        }();
        for (int b = 0; b < 2; ++b) {
            const auto ket = product_vector(L, S, b, env0);
            const auto hk = parts.H_S.apply(ket);
            for (int a = 0; a < 2; ++a)
                h_s(a, b) = inner(product_vector(L, S, a, env0), hk);
        }
    }

    // g[d][b][c][a] = <d (x) psi_b| V_SE |c (x) psi_a>
    cplx g[2][2][2][2];
    {
        std::array<std::array<std::vector<cplx>, 2>, 2> bras;
        for (int d = 0; d < 2; ++d)
            for (int b = 0; b < 2; ++b)
                bras[d][b] = product_vector(L, S, d, blocks[static_cast<std::size_t>(b)]);
        for (int c = 0; c < 2; ++c)
            for (int a = 0; a < 2; ++a) {
                const auto vk = parts.V_SE.apply(product_vector(L, S, c, blocks[static_cast<std::size_t>(a)]));
                for (int d = 0; d < 2; ++d)
                    for (int b = 0; b < 2; ++b)
                        g[d][b][c][a] = inner(bras[d][b], vk);
            }
    }

    MMatrix3 M;
    for (int j = 0; j < 3; ++j) {
        const Mat2& sj = sigma[static_cast<std::size_t>(j)];
        const double r_j = std::real((sj * rho_s).trace());
        for (int k = 0; k < 3; ++k) {
            const Mat2& sk = sigma[static_cast<std::size_t>(k)];
            const double h_k = 0.5 * std::real((sk * h_s).trace());
            // Tr{rho_E^(j) V_E^(k)} = sum (s_j)_{ba} (s_k)_{cd} <d psi_b|V|c psi_a>
            cplx tr = 0.0;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    for (int c = 0; c < 2; ++c)
                        for (int d = 0; d < 2; ++d)
                            tr += sj(b, a) * sk(c, d) * g[d][b][c][a];
            M(j, k) = -(r_j * h_k + 0.5 * std::real(tr));
        }
    }
    return M;
}

DensePropagator::DensePropagator(const PauliOperator& H) : L_(H.sites())
{
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(H.explicit_matrix());
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("dense eigendecomposition failed");
    evals_ = eig.eigenvalues();
    evecs_ = eig.eigenvectors();
}

DenseState DensePropagator::evolve(const DenseState& psi, double t) const
{
    if (psi.sites() != L_)
        throw std::invalid_argument("state and propagator sizes differ");
    const auto amp = psi.amplitudes();
    const Eigen::Map<const Eigen::VectorXcd> v(amp.data(), static_cast<Eigen::Index>(amp.size()));
    Eigen::VectorXcd c = evecs_.adjoint() * v;
    for (Eigen::Index i = 0; i < c.size(); ++i)
        c(i) *= std::polar(1.0, -evals_(i) * t);
    const Eigen::VectorXcd out = evecs_ * c;
    return DenseState(L_, std::vector<cplx>(out.data(), out.data() + out.size()));
}

PureState1x random_state_1x(int L, std::mt19937_64& rng)
{
    std::normal_distribution<double> gauss;
    std::vector<cplx> f(static_cast<std::size_t>(L));
    for (auto& a : f)
        a = {gauss(rng), gauss(rng)};
    return PureState1x::normalized(std::move(f));
}

std::vector<double> sector_weights(const DenseState& psi)
{
    std::vector<double> w(static_cast<std::size_t>(psi.sites() + 1), 0.0);
    const auto amp = psi.amplitudes();
    for (std::size_t b = 0; b < amp.size(); ++b)
        w[static_cast<std::size_t>(std::popcount(static_cast<std::uint32_t>(b)))] += std::norm(amp[b]);
    return w;
}

} // namespace lergo::oracle
