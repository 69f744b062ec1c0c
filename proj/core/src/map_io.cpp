#include "rayloc/map_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rayloc/errors.hpp"

namespace rayloc {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                known = true;
                break;
            }
        if (!known) throw parse_error(where + ": unknown key '" + item.key() + "'");
    }
}

Vec3 parse_vertex(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
        !v[2].is_number())
        throw parse_error(where + ": vertex must be an array of 3 numbers");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

Surface parse_surface(const json& s, std::size_t index) {
    const std::string fallback = "surface #" + std::to_string(index);
    if (!s.is_object()) throw parse_error(fallback + ": must be an object");

    std::string id;
    if (auto it = s.find("id"); it != s.end() && it->is_string())
        id = it->get<std::string>();
    const std::string where = id.empty() ? fallback : "surface '" + id + "'";
    if (id.empty()) throw parse_error(where + ": missing string 'id'");

    reject_unknown_keys(s, {"id", "vertices", "material", "transmission_loss_db"}, where);

    const auto verts_it = s.find("vertices");
    if (verts_it == s.end() || !verts_it->is_array())
        throw parse_error(where + ": missing 'vertices' array");
    std::vector<Vec3> vertices;
    vertices.reserve(verts_it->size());
    for (const auto& v : *verts_it) vertices.push_back(parse_vertex(v, where));

    std::string material = "default";
    if (auto it = s.find("material"); it != s.end()) {
        if (!it->is_string()) throw parse_error(where + ": 'material' must be a string");
        material = it->get<std::string>();
    }

    double loss = kDefaultTransmissionLossDb;
    if (auto it = s.find("transmission_loss_db"); it != s.end()) {
        if (!it->is_number())
            throw parse_error(where + ": 'transmission_loss_db' must be a number");
        loss = it->get<double>();
    }

    return Surface(std::move(id), std::move(vertices), std::move(material), loss);
}

}  // namespace

IndoorMap load_map(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string("map: ") + e.what());
    }
    if (!doc.is_object()) throw parse_error("map: document must be a JSON object");
    reject_unknown_keys(doc, {"name", "units", "surfaces"}, "map");

    const auto name_it = doc.find("name");
    if (name_it == doc.end() || !name_it->is_string())
        throw parse_error("map: missing string 'name'");

    const auto units_it = doc.find("units");
    if (units_it == doc.end() || !units_it->is_string())
        throw parse_error("map: missing string 'units'");
    if (units_it->get<std::string>() != "meters")
        throw validation_error("map: unsupported units '" + units_it->get<std::string>() +
                               "' (only \"meters\")");

    const auto surf_it = doc.find("surfaces");
    if (surf_it == doc.end() || !surf_it->is_array())
        throw parse_error("map: missing 'surfaces' array");
    if (surf_it->empty()) throw validation_error("map: 'surfaces' is empty");

    std::vector<Surface> surfaces;
    surfaces.reserve(surf_it->size());
    for (std::size_t i = 0; i < surf_it->size(); ++i)
        surfaces.push_back(parse_surface((*surf_it)[i], i));

    return IndoorMap(name_it->get<std::string>(), std::move(surfaces));
}

IndoorMap load_map_string(const std::string& text) {
    std::istringstream in(text);
    return load_map(in);
}

IndoorMap load_map_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open map file '" + path + "'");
    return load_map(in);
}

std::string save_map(const IndoorMap& map) {
    json doc;
    doc["name"] = map.name();
    doc["units"] = "meters";
    json surfaces = json::array();
    for (const Surface& s : map.surfaces()) {
        json js;
        js["id"] = s.id();
        json verts = json::array();
        for (const Vec3& v : s.vertices()) verts.push_back({v.x, v.y, v.z});
        js["vertices"] = verts;
        js["material"] = s.material_id();
        js["transmission_loss_db"] = s.transmission_loss_db();
        surfaces.push_back(js);
    }
    doc["surfaces"] = surfaces;
    return doc.dump(2) + "\n";
}

void save_map_file(const IndoorMap& map, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write map file '" + path + "'");
    out << save_map(map);
    if (!out) throw io_error("failed writing map file '" + path + "'");
}

}  // namespace rayloc
