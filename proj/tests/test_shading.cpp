#include "photogeo/error.hpp"
#include "photogeo/shading.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace photogeo;

namespace {

NormalMap random_normals(int W, int H, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    NormalMap n(W, H);
    for (auto& v : n)
        v = Vec3(u(rng), u(rng), 1.0).normalized();
    return n;
}

Image random_albedo(int W, int H, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.05, 0.95);
    Image a(W, H);
    for (auto& v : a)
        v = Vec3(u(rng), u(rng), u(rng));
    return a;
}

} // namespace

TEST_CASE("light direction")
{
    CHECK((light_direction(0, 0) - Vec3(0, 0, 1)).norm() == 0.0);
    CHECK((light_direction(1, 0) - Vec3(1, 0, 1) / std::sqrt(2.0)).norm() < 1e-15);
    CHECK((light_direction(-0.9, 0.8) - Vec3(-0.9, 0.8, 1) / std::sqrt(2.45)).norm() < 1e-15);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int k = 0; k < 100; ++k) {
        const Vec3 l = light_direction(u(rng), u(rng));
        CHECK(std::abs(l.norm() - 1.0) < 1e-12);
        CHECK(l.z() > 0.0);
    }
}

TEST_CASE("shading examples")
{
    std::mt19937_64 rng(2);
    const Image a = random_albedo(6, 5, rng);
    const NormalMap n = random_normals(6, 5, rng);

    SUBCASE("ambient only returns the albedo")
    {
        const Image J = shade(a, n, Lighting::canonical());
        CHECK(J == a);
    }
    SUBCASE("normal perpendicular or facing away gives ks * a")
    {
        NormalMap side(6, 5, Vec3(1, 0, 0));
        NormalMap away(6, 5, Vec3(0, 0, -1));
        const Lighting l{0, 0, 0.3, 0.7};
        for (const auto* nm : {&side, &away}) {
            const Image J = shade(a, *nm, l);
            for (std::size_t i = 0; i < J.size(); ++i)
                CHECK((J[i] - 0.3 * a[i]).norm() < 1e-15);
        }
    }
    SUBCASE("front light on a flat normal")
    {
        const Image J = shade(Image(3, 3, Vec3::Constant(0.5)), NormalMap(3, 3, Vec3(0, 0, 1)), {0, 0, 0.2, 0.6});
        for (const auto& v : J)
            CHECK((v - Vec3::Constant(0.4)).norm() < 1e-15);
    }
    SUBCASE("no clamping above one")
    {
        const Image J = shade(Image(2, 2, Vec3::Constant(0.9)), NormalMap(2, 2, Vec3(0, 0, 1)), {0, 0, 1.0, 1.0});
        CHECK(J[0].x() == doctest::Approx(1.8));
    }
}

TEST_CASE("shading shape mismatch")
{
    CHECK_THROWS_AS(shade(Image(3, 3), NormalMap(3, 2, Vec3(0, 0, 1)), Lighting::canonical()), Error);
}

TEST_CASE("shading is linear in albedo and monotone in kd")
{
    std::mt19937_64 rng(3);
    const Image a = random_albedo(8, 8, rng);
    const NormalMap n = random_normals(8, 8, rng);
    const Lighting l{0.3, -0.2, 0.4, 0.5};
    const Image J = shade(a, n, l);
    for (double c : {0.0, 0.5, 2.0}) {
        Image ca = a;
        for (auto& v : ca)
            v *= c;
        const Image Jc = shade(ca, n, l);
        for (std::size_t i = 0; i < J.size(); ++i)
            CHECK((Jc[i] - c * J[i]).norm() < 1e-14);
    }
    Lighting brighter = l;
    brighter.kd = 0.8;
    const Image Jb = shade(a, n, brighter);
    const Vec3 dir = light_direction(l.lx, l.ly);
    for (std::size_t i = 0; i < J.size(); ++i)
        if (dir.dot(n[i]) > 0)
            for (int ch = 0; ch < 3; ++ch)
                CHECK(Jb[i][ch] >= J[i][ch]);
}

TEST_CASE("shading gradient with respect to lighting")
{
    std::mt19937_64 rng(4);
    const Image a = random_albedo(8, 8, rng);
    const NormalMap n = random_normals(8, 8, rng);
    const Lighting l{0.2, 0.1, 0.4, 0.5};
    const Vec3 dir = light_direction(l.lx, l.ly);

    // Per-pixel check: weight one pixel channel at a time.
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (dir.dot(n[i]) <= 1e-3)
            continue;
        Image w(8, 8, Vec3::Zero());
        w[i] = Vec3(1.0, -0.5, 0.25);
        auto f = [&](const Lighting& ll) {
            const Image J = shade(a, n, ll);
            return w[i].dot(J[i]);
        };
        ShadeGrad g{Image(8, 8, Vec3::Zero()), NormalMap(8, 8, Vec3::Zero()), {}};
        shade_backward(a, n, l, w, g);
        const double eps = 1e-4;
        const double analytic[4] = {g.light.lx, g.light.ly, g.light.ks, g.light.kd};
        for (int k = 0; k < 4; ++k) {
            Lighting p = l, m = l;
            double* fp[4] = {&p.lx, &p.ly, &p.ks, &p.kd};
            double* fm[4] = {&m.lx, &m.ly, &m.ks, &m.kd};
            *fp[k] += eps;
            *fm[k] -= eps;
            const double fd = (f(p) - f(m)) / (2 * eps);
            if (std::abs(fd) < 1e-12 && std::abs(analytic[k]) < 1e-12)
                continue;
            CHECK(test::rel_error(analytic[k], fd) < 1e-5);
        }
    }
}

TEST_CASE("shading gradient with respect to albedo and normals")
{
    std::mt19937_64 rng(5);
    const Image a = random_albedo(5, 4, rng);
    const NormalMap n = random_normals(5, 4, rng);
    const Lighting l{-0.3, 0.2, 0.3, 0.6};
    Image w(5, 4);
    std::normal_distribution<double> g01;
    for (auto& v : w)
        v = Vec3(g01(rng), g01(rng), g01(rng));
    auto f = [&](const Image& aa, const NormalMap& nn) {
        const Image J = shade(aa, nn, l);
        double s = 0;
        for (std::size_t i = 0; i < J.size(); ++i)
            s += w[i].dot(J[i]);
        return s;
    };
    ShadeGrad g{Image(5, 4, Vec3::Zero()), NormalMap(5, 4, Vec3::Zero()), {}};
    shade_backward(a, n, l, w, g);
    const double eps = 1e-6;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (int c = 0; c < 3; ++c) {
            Image ap = a, am = a;
            ap[i][c] += eps;
            am[i][c] -= eps;
            CHECK(g.albedo[i][c] == doctest::Approx((f(ap, n) - f(am, n)) / (2 * eps)).epsilon(1e-6));
            NormalMap np = n, nm = n;
            np[i][c] += eps;
            nm[i][c] -= eps;
            CHECK(g.normals[i][c] == doctest::Approx((f(a, np) - f(a, nm)) / (2 * eps)).epsilon(1e-6));
        }
}

TEST_CASE("lighting parameters")
{
    const Lighting l{0.3, -0.4, 0.25, 0.6};
    const Lighting back = LightingParams::from_lighting(l).mapped();
    CHECK(back.lx == l.lx);
    CHECK(back.ly == l.ly);
    CHECK(back.ks == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(back.kd == doctest::Approx(0.6).epsilon(1e-12));

    const LightingParams canon = LightingParams::from_lighting(Lighting::canonical());
    CHECK(std::isfinite(canon.ks_raw));
    CHECK(std::isfinite(canon.kd_raw));
    CHECK(canon.mapped().ks > 0.99);
    CHECK(canon.mapped().kd < 0.01);

    const LightingParams p{0.1, 0.2, 0.3, -0.4};
    const LightingGrad g{1.0, 2.0, 3.0, 4.0};
    const LightingParams raw = lighting_params_backward(p, g);
    auto value = [&](const LightingParams& q) {
        const Lighting m = q.mapped();
        return g.lx * m.lx + g.ly * m.ly + g.ks * m.ks + g.kd * m.kd;
    };
    for (std::size_t k = 0; k < 4; ++k) {
        LightingParams a = p, b = p;
        a[k] += 1e-6;
        b[k] -= 1e-6;
        CHECK(raw[k] == doctest::Approx((value(a) - value(b)) / 2e-6).epsilon(1e-7));
    }
}

TEST_CASE("lighting offsets clamp the weights")
{
    const Lighting base = Lighting::canonical();
    const Lighting l = apply_offset(base, {0.5, -0.1, 0.4, -0.24});
    CHECK(l.lx == 0.5);
    CHECK(l.ly == -0.1);
    CHECK(l.kd == doctest::Approx(0.4));
    CHECK(l.ks == doctest::Approx(0.76));
    const Lighting c = apply_offset(base, {0, 0, -0.1, 0.06});
    CHECK(c.kd == 0.0);
    CHECK(c.ks == 1.0);
}

TEST_CASE("albedo mapping")
{
    CHECK(sigmoid(0.0) == 0.5);
    for (double v : {0.01, 0.2, 0.5, 0.8, 0.99})
        CHECK(sigmoid(logit(v)) == doctest::Approx(v).epsilon(1e-12));
    CHECK(std::isfinite(logit(0.0)));
    CHECK(std::isfinite(logit(1.0)));
    Image raw(2, 2, Vec3(-40, 0, 40));
    for (const auto& v : albedo_from_raw(raw)) {
        CHECK(v.minCoeff() >= 0.0);
        CHECK(v.maxCoeff() <= 1.0);
    }
}
