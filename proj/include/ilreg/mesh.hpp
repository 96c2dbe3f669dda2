#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ilreg/error.hpp"
#include "ilreg/math.hpp"

namespace ilreg {

// Model-side anchors used to place the pose: two wheel centers and the rear
// axle direction, all in model coordinates.
struct RegistrationMeta {
    Vec3 rear_wheel_center;
    Vec3 front_wheel_center;
    Vec3 axle_dir;

    void validate() const {
        if (std::fabs(axle_dir.norm() - 1.0) > 1e-6)
            throw ValidationError("axle_dir must be a unit vector");
        const Vec3 w = front_wheel_center - rear_wheel_center;
        const double wn = w.norm();
        if (!(wn > 0.0)) throw ValidationError("wheelbase vector has zero length");
        if (std::fabs(axle_dir.dot(w / wn)) >= 0.99)
            throw ValidationError("axle direction is (nearly) parallel to the wheelbase");
    }
};

struct ReflectanceDefaults {
    double k_a = 0.3;
    double k_d = 0.7;
};

// Triangulated surface with per-vertex unit normals and reflectances.
// Immutable once loaded; safe to share across threads.
struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<Vec3> normals;
    std::vector<std::array<int, 3>> triangles;
    std::vector<double> k_a;
    std::vector<double> k_d;
    std::optional<RegistrationMeta> meta;

    size_t vertex_count() const { return vertices.size(); }
    size_t triangle_count() const { return triangles.size(); }

    void validate() const {
        const int n = static_cast<int>(vertices.size());
        if (normals.size() != vertices.size() || k_a.size() != vertices.size() ||
            k_d.size() != vertices.size())
            throw ValidationError("per-vertex attribute arrays must match the vertex count");
        for (const auto& t : triangles)
            for (int idx : t)
                if (idx < 0 || idx >= n) throw ValidationError("triangle index out of range");
        for (const auto& nrm : normals)
            if (std::fabs(nrm.norm() - 1.0) > 1e-6)
                throw ValidationError("vertex normal is not unit length");
        for (size_t i = 0; i < k_a.size(); ++i)
            if (!(k_a[i] >= 0.0 && k_a[i] <= 1.0 && k_d[i] >= 0.0 && k_d[i] <= 1.0))
                throw ValidationError("reflectance outside [0,1]");
        if (meta) meta->validate();
    }
};

inline const RegistrationMeta& require_meta(const Mesh& mesh) {
    if (!mesh.meta)
        throw MetadataError("mesh has no registration metadata (missing .meta.json sidecar)");
    return *mesh.meta;
}

// Area-weighted average of incident face normals, normalized per vertex.
// Summation over faces is commutative up to rounding, so triangle order in
// the file does not matter. Vertices with no incident area fall back to +z.
inline void compute_vertex_normals(Mesh& mesh) {
    mesh.normals.assign(mesh.vertices.size(), Vec3{});
    for (const auto& t : mesh.triangles) {
        const Vec3& a = mesh.vertices[static_cast<size_t>(t[0])];
        const Vec3& b = mesh.vertices[static_cast<size_t>(t[1])];
        const Vec3& c = mesh.vertices[static_cast<size_t>(t[2])];
        const Vec3 fn = (b - a).cross(c - a);  // norm = 2 * area
        for (int idx : t) {
            Vec3& n = mesh.normals[static_cast<size_t>(idx)];
            n = n + fn;
        }
    }
    for (auto& n : mesh.normals) {
        const double len = n.norm();
        n = len > 1e-20 ? n / len : Vec3{0.0, 0.0, 1.0};
    }
}

namespace detail {

struct ObjCorner {
    int vertex = -1;
    int normal = -1;  // -1 when the face carries no normal reference
};

inline ObjCorner parse_obj_corner(const std::string& tok, int line_no) {
    ObjCorner c;
    // Accept "v", "v/t", "v//n", "v/t/n".
    size_t first = tok.find('/');
    const std::string vpart = tok.substr(0, first);
    try {
        c.vertex = std::stoi(vpart);
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": bad face index '" + tok + "'");
    }
    if (first != std::string::npos) {
        size_t second = tok.find('/', first + 1);
        if (second != std::string::npos && second + 1 < tok.size()) {
            try {
                c.normal = std::stoi(tok.substr(second + 1));
            } catch (const std::exception&) {
                throw ParseError("line " + std::to_string(line_no) + ": bad normal index '" + tok +
                                 "'");
            }
        }
    }
    if (c.vertex <= 0)
        throw ParseError("line " + std::to_string(line_no) +
                         ": only positive 1-based indices are supported");
    return c;
}

inline std::string sidecar_path(const std::string& obj_path) {
    std::string base = obj_path;
    if (base.size() >= 4 && base.compare(base.size() - 4, 4, ".obj") == 0)
        base.resize(base.size() - 4);
    return base + ".meta.json";
}

inline Vec3 json_vec3(const nlohmann::json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3)
        throw MetadataError(path + ": missing or malformed '" + key + "'");
    return {j[key][0].get<double>(), j[key][1].get<double>(), j[key][2].get<double>()};
}

}  // namespace detail

// Load an ASCII OBJ subset (v, vn, f; polygons fan-triangulated) plus the
// optional "<name>.meta.json" sidecar carrying wheel anchors and reflectances.
// Normals are taken from face vn references when present, otherwise computed.
inline Mesh load_mesh(const std::string& path, const ReflectanceDefaults& defaults = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    Mesh mesh;
    std::vector<Vec3> file_normals;
    std::vector<std::vector<detail::ObjCorner>> faces;
    std::vector<int> face_lines;

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ss(line);
        std::string kind;
        if (!(ss >> kind) || kind.empty() || kind[0] == '#') continue;
        if (kind == "v") {
            Vec3 v;
            if (!(ss >> v.x >> v.y >> v.z))
                throw ParseError("line " + std::to_string(line_no) + ": malformed vertex");
            mesh.vertices.push_back(v);
        } else if (kind == "vn") {
            Vec3 n;
            if (!(ss >> n.x >> n.y >> n.z))
                throw ParseError("line " + std::to_string(line_no) + ": malformed normal");
            file_normals.push_back(n);
        } else if (kind == "f") {
            std::vector<detail::ObjCorner> corners;
            std::string tok;
            while (ss >> tok) corners.push_back(detail::parse_obj_corner(tok, line_no));
            if (corners.size() < 3)
                throw ParseError("line " + std::to_string(line_no) + ": face with <3 vertices");
            faces.push_back(std::move(corners));
            face_lines.push_back(line_no);
        }
        // other OBJ keywords (vt, o, g, s, usemtl, ...) are ignored
    }

    // Index validation against the final counts, then fan triangulation and
    // per-vertex accumulation of referenced vn directions.
    const size_t nv = mesh.vertices.size();
    std::vector<Vec3> ref_normals(nv);
    std::vector<uint8_t> has_ref(nv, 0);
    for (size_t fi = 0; fi < faces.size(); ++fi) {
        for (const auto& c : faces[fi]) {
            if (c.vertex > static_cast<int>(nv))
                throw ValidationError("line " + std::to_string(face_lines[fi]) +
                                      ": face references vertex " + std::to_string(c.vertex) +
                                      " but file has " + std::to_string(nv) + " vertices");
            if (c.normal > 0) {
                if (c.normal > static_cast<int>(file_normals.size()))
                    throw ValidationError("line " + std::to_string(face_lines[fi]) +
                                          ": normal index " + std::to_string(c.normal) +
                                          " out of range");
                Vec3& acc = ref_normals[static_cast<size_t>(c.vertex - 1)];
                acc = acc + file_normals[static_cast<size_t>(c.normal - 1)];
                has_ref[static_cast<size_t>(c.vertex - 1)] = 1;
            }
        }
        const auto& corners = faces[fi];
        for (size_t i = 1; i + 1 < corners.size(); ++i)
            mesh.triangles.push_back(
                {corners[0].vertex - 1, corners[i].vertex - 1, corners[i + 1].vertex - 1});
    }

    // Normals: explicit references win; everything else is computed.
    bool any_ref = false;
    for (uint8_t h : has_ref) any_ref |= h != 0;
    if (!any_ref && file_normals.size() == nv && !file_normals.empty()) {
        // vn list parallel to vertices, faces without refs: common export style
        mesh.normals = file_normals;
        for (auto& n : mesh.normals) {
            const double len = n.norm();
            n = len > 1e-20 ? n / len : Vec3{0.0, 0.0, 1.0};
        }
    } else {
        compute_vertex_normals(mesh);
        for (size_t i = 0; i < nv; ++i) {
            if (!has_ref[i]) continue;
            const double len = ref_normals[i].norm();
            if (len > 1e-20) mesh.normals[i] = ref_normals[i] / len;
        }
    }

    mesh.k_a.assign(nv, defaults.k_a);
    mesh.k_d.assign(nv, defaults.k_d);

    const std::string side = detail::sidecar_path(path);
    std::ifstream sin(side);
    if (sin) {
        nlohmann::json j;
        try {
            sin >> j;
        } catch (const std::exception& e) {
            throw MetadataError(side + ": " + e.what());
        }
        RegistrationMeta meta;
        meta.rear_wheel_center = detail::json_vec3(j, "rear_wheel_center", side);
        meta.front_wheel_center = detail::json_vec3(j, "front_wheel_center", side);
        meta.axle_dir = detail::json_vec3(j, "axle_dir", side);
        const double an = meta.axle_dir.norm();
        if (an > 0.0) meta.axle_dir = meta.axle_dir / an;
        mesh.meta = meta;
        auto fill = [&](const char* key, std::vector<double>& dst) {
            if (!j.contains(key)) return;
            const auto& v = j[key];
            if (v.is_number()) {
                dst.assign(nv, v.get<double>());
            } else if (v.is_array()) {
                if (v.size() != nv)
                    throw MetadataError(side + ": per-vertex '" + std::string(key) +
                                        "' length mismatch");
                for (size_t i = 0; i < nv; ++i) dst[i] = v[i].get<double>();
            } else {
                throw MetadataError(side + ": '" + std::string(key) +
                                    "' must be a number or array");
            }
        };
        fill("k_a", mesh.k_a);
        fill("k_d", mesh.k_d);
    }

    mesh.validate();
    return mesh;
}

// Serialize back to the same OBJ subset (v, vn, f with v//n references).
// %.17g keeps the round trip bit-exact for doubles.
inline void save_mesh(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    char buf[160];
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
        out << buf;
    }
    for (const auto& n : mesh.normals) {
        std::snprintf(buf, sizeof(buf), "vn %.17g %.17g %.17g\n", n.x, n.y, n.z);
        out << buf;
    }
    for (const auto& t : mesh.triangles) {
        std::snprintf(buf, sizeof(buf), "f %d//%d %d//%d %d//%d\n", t[0] + 1, t[0] + 1, t[1] + 1,
                      t[1] + 1, t[2] + 1, t[2] + 1);
        out << buf;
    }
    if (!out) throw IoError("failed writing " + path);
}

inline void save_meta_sidecar(const RegistrationMeta& meta, const std::string& obj_path,
                              std::optional<double> k_a = {}, std::optional<double> k_d = {}) {
    nlohmann::ordered_json j;
    j["rear_wheel_center"] = {meta.rear_wheel_center.x, meta.rear_wheel_center.y,
                              meta.rear_wheel_center.z};
    j["front_wheel_center"] = {meta.front_wheel_center.x, meta.front_wheel_center.y,
                               meta.front_wheel_center.z};
    j["axle_dir"] = {meta.axle_dir.x, meta.axle_dir.y, meta.axle_dir.z};
    if (k_a) j["k_a"] = *k_a;
    if (k_d) j["k_d"] = *k_d;
    const std::string side = detail::sidecar_path(obj_path);
    std::ofstream out(side);
    if (!out) throw IoError("cannot open " + side + " for writing");
    out << j.dump(2) << "\n";
}

}  // namespace ilreg
