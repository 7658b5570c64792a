#include "photogeo/metrics.hpp"

#include "photogeo/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace photogeo {

double side(const DepthMap& pred, const DepthMap& gt, const Mask* mask)
{
    if (!pred.same_shape(gt) || (mask && !pred.same_shape(*mask)))
        throw Error(ErrorCode::ShapeMismatch, "depth maps differ in size");
    // Variance of log ratios, accumulated relative to the first one so that a constant
    // ratio gives exactly zero.
    double sum = 0.0, sum_sq = 0.0, ref = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (mask && !(*mask)[i])
            continue;
        if (!(pred[i] > 0.0) || !(gt[i] > 0.0))
            throw Error(ErrorCode::NonpositiveDepth, "scale-invariant error needs positive depths");
        const double delta = std::log(pred[i] / gt[i]);
        if (count == 0)
            ref = delta;
        sum += delta - ref;
        sum_sq += (delta - ref) * (delta - ref);
        ++count;
    }
    if (count < 2)
        throw Error(ErrorCode::EmptyMask, "scale-invariant error needs at least two pixels");
    const double mean = sum / count;
    return std::sqrt(std::max(0.0, sum_sq / count - mean * mean));
}

double mad(const NormalMap& pred, const NormalMap& gt, const Mask* mask)
{
    if (!pred.same_shape(gt) || (mask && !pred.same_shape(*mask)))
        throw Error(ErrorCode::ShapeMismatch, "normal maps differ in size");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (mask && !(*mask)[i])
            continue;
        sum += std::atan2(pred[i].cross(gt[i]).norm(), pred[i].dot(gt[i]));
        ++count;
    }
    if (count == 0)
        throw Error(ErrorCode::EmptyMask, "mask selects no pixel");
    return sum / count * 180.0 / std::numbers::pi;
}

double psnr(const Image& a, const Image& b, const Mask* mask)
{
    if (!a.same_shape(b) || (mask && !a.same_shape(*mask)))
        throw Error(ErrorCode::ShapeMismatch, "images differ in size");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (mask && !(*mask)[i])
            continue;
        sum += (a[i] - b[i]).squaredNorm();
        count += 3;
    }
    if (count == 0)
        throw Error(ErrorCode::EmptyMask, "mask selects no pixel");
    const double mse = sum / count;
    if (mse == 0.0)
        return kPsnrIdentical;
    return std::min(kPsnrIdentical, 10.0 * std::log10(1.0 / mse));
}

std::string EvalReport::to_json() const
{
    nlohmann::ordered_json j;
    j["side"] = side;
    j["mad"] = mad;
    if (psnr)
        j["psnr"] = *psnr;
    j["pixels"] = pixels;
    return j.dump();
}

} // namespace photogeo
