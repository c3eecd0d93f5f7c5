#ifndef PHASELAB_VERSION_HPP
#define PHASELAB_VERSION_HPP

namespace phaselab {

inline constexpr const char* kVersion = "0.1.0";

} // namespace phaselab

#endif
