#include "dl/engine.hpp"

#include <stdexcept>

namespace dl {

Stream1D::Stream1D(Window1D w, const GrainLaw1D& law, const RngKey& key, double t0)
    : win_(w),
      law_(&law),
      arr_(key.stream(purpose::arrivals)),
      shp_(key.stream(purpose::shapes)),
      t_(t0),
      rate_(w.expanded_measure()) {
    if (!(win_.length > 0.0)) throw std::invalid_argument("stream: window length must be positive");
    if (!(rate_ > 0.0)) throw std::invalid_argument("stream: expanded window measure must be positive");
}

Arrival1D Stream1D::next() {
    Arrival1D a;
    a.pos = arr_.uniform(-win_.halo, win_.length + win_.halo);  // position first
    t_ += arr_.exponential(rate_);                              // then the time step
    a.time = t_;
    a.shape = law_->sample(shp_);
    a.index = idx_++;
    return a;
}

Stream2D::Stream2D(Window2D w, const GrainLaw2D& law, const RngKey& key, double t0)
    : win_(w),
      law_(&law),
      arr_(key.stream(purpose::arrivals)),
      shp_(key.stream(purpose::shapes)),
      t_(t0),
      rate_(w.expanded_measure()) {
    if (!(win_.box.width() > 0.0) || !(win_.box.height() > 0.0))
        throw std::invalid_argument("stream: window must have positive area");
    if (!(rate_ > 0.0)) throw std::invalid_argument("stream: expanded window measure must be positive");
}

Arrival2D Stream2D::next() {
    Box2 e = win_.expanded();
    Arrival2D a;
    a.pos.x = arr_.uniform(e.lo.x, e.hi.x);
    a.pos.y = arr_.uniform(e.lo.y, e.hi.y);
    t_ += arr_.exponential(rate_);
    a.time = t_;
    a.shape = law_->sample(shp_);
    a.index = idx_++;
    return a;
}

}  // namespace dl
