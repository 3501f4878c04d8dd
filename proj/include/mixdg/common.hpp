#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mixdg {

/// Element shapes known to the library. Quad and Triangle carry the full
/// solver; the 3D shapes are supported by the mesh generator and the subcell
/// decompositions only.
enum class ElementType { Quad, Triangle, Hexahedron, Prism, Pyramid, Tetrahedron };

[[nodiscard]] constexpr int dimension_of(ElementType ty) noexcept {
  return (ty == ElementType::Quad || ty == ElementType::Triangle) ? 2 : 3;
}

/// Four-letter tag used in mesh files.
[[nodiscard]] std::string_view element_tag(ElementType ty) noexcept;
[[nodiscard]] ElementType element_type_from_tag(std::string_view tag);

/// Measure of the reference polytope (bi-unit conventions).
[[nodiscard]] double reference_measure(ElementType ty);

/// Raised when a state leaves the admissible set (rho <= eps or p <= eps).
class AdmissibilityError : public std::runtime_error {
 public:
  explicit AdmissibilityError(const std::string& what, long element = -1)
      : std::runtime_error(what), element_(element) {}
  [[nodiscard]] long element() const noexcept { return element_; }

 private:
  long element_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Positivity threshold shared by the EOS admissibility test and the sanity
/// indicator.
inline constexpr double kAdmissibleEps = 1e-16;

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

}  // namespace mixdg
