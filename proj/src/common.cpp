#include "mixdg/common.hpp"

namespace mixdg {

std::string_view element_tag(ElementType ty) noexcept {
  switch (ty) {
    case ElementType::Quad: return "QUAD";
    case ElementType::Triangle: return "TRIA";
    case ElementType::Hexahedron: return "HEXA";
    case ElementType::Prism: return "PRIS";
    case ElementType::Pyramid: return "PYRA";
    case ElementType::Tetrahedron: return "TETR";
  }
  return "????";
}

ElementType element_type_from_tag(std::string_view tag) {
  for (auto ty : {ElementType::Quad, ElementType::Triangle, ElementType::Hexahedron,
                  ElementType::Prism, ElementType::Pyramid, ElementType::Tetrahedron}) {
    if (element_tag(ty) == tag) return ty;
  }
  throw MeshError("unknown element tag '" + std::string(tag) + "'");
}

double reference_measure(ElementType ty) {
  switch (ty) {
    case ElementType::Quad: return 4.0;
    case ElementType::Triangle: return 2.0;
    case ElementType::Hexahedron: return 8.0;
    case ElementType::Prism: return 4.0;
    case ElementType::Pyramid: return 8.0 / 3.0;
    case ElementType::Tetrahedron: return 4.0 / 3.0;
  }
  throw std::invalid_argument("reference_measure: bad element type");
}

}  // namespace mixdg
