#include "mtcd/data/sample.hpp"

namespace mtcd::data {

std::string to_string(T1Label label) { return label == T1Label::healthy ? "healthy" : "unhealthy"; }

std::string to_string(T2Label label) {
    switch (label) {
    case T2Label::pre_cataract: return "pre_cataract";
    case T2Label::post_cataract: return "post_cataract";
    case T2Label::others: return "others";
    }
    return "others";
}

T1Label t1_from_string(const std::string& s) {
    if (s == "healthy") return T1Label::healthy;
    if (s == "unhealthy") return T1Label::unhealthy;
    throw ValidationError("unknown T1 label '" + s + "'");
}

T2Label t2_from_string(const std::string& s) {
    if (s == "pre_cataract") return T2Label::pre_cataract;
    if (s == "post_cataract") return T2Label::post_cataract;
    if (s == "others") return T2Label::others;
    throw ValidationError("unknown T2 label '" + s + "'");
}

T1Label implied_t1(T2Label t2) noexcept {
    return t2 == T2Label::others ? T1Label::healthy : T1Label::unhealthy;
}

void EyeSample::validate() const {
    if (mask) {
        if (!mask->same_shape(image))
            throw ValidationError(sample_id + ": mask is " + std::to_string(mask->height()) + "x" +
                                  std::to_string(mask->width()) + " but image is " +
                                  std::to_string(image.height()) + "x" + std::to_string(image.width()));
        require_binary(*mask, sample_id.c_str());
    }
    if (label_t1 && label_t2 && implied_t1(*label_t2) != *label_t1)
        throw ValidationError(sample_id + ": label_t2 " + to_string(*label_t2) + " contradicts label_t1 " +
                              to_string(*label_t1));
}

} // namespace mtcd::data
