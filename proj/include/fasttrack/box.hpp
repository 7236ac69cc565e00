#ifndef FASTTRACK_BOX_HPP
#define FASTTRACK_BOX_HPP

#include <algorithm>

namespace fasttrack {

struct BoundingBox {
    double left = 0.0;
    double top = 0.0;
    double width = 0.0;
    double height = 0.0;

    double right() const { return left + width; }
    double bottom() const { return top + height; }
    double center_x() const { return left + 0.5 * width; }
    double center_y() const { return top + 0.5 * height; }
    double area() const { return width * height; }
    double aspect() const { return width / height; }
};

inline double intersection_area(const BoundingBox& a, const BoundingBox& b) {
    const double w = std::min(a.right(), b.right()) - std::max(a.left, b.left);
    const double h = std::min(a.bottom(), b.bottom()) - std::max(a.top, b.top);
    return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

inline double iou(const BoundingBox& a, const BoundingBox& b) {
    const double inter = intersection_area(a, b);
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

inline double giou(const BoundingBox& a, const BoundingBox& b) {
    const double inter = intersection_area(a, b);
    const double uni = a.area() + b.area() - inter;
    const double ew = std::max(a.right(), b.right()) - std::min(a.left, b.left);
    const double eh = std::max(a.bottom(), b.bottom()) - std::min(a.top, b.top);
    const double enclose = ew * eh;
    const double base = uni > 0.0 ? inter / uni : 0.0;
    return enclose > 0.0 ? base - (enclose - uni) / enclose : base;
}

}  // namespace fasttrack

#endif
