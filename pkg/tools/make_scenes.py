#!/usr/bin/env python3
"""Serialize the bundled procedural scenes to glTF 2.0 files.

Regenerates the checked-in assets under scenes/.  The writer targets the
subset the package parser accepts: embedded base64 buffer, one primitive
per mesh, factor-only PBR materials, perspective cameras with a finite
far plane, and KHR_lights_punctual point lights.
"""

import argparse
import base64
import json
from pathlib import Path

import numpy as np

from softrender.procedural import make_bench_scene, make_demo_scene, make_triangle_scene

F32 = 5126
U16 = 5123
U32 = 5125


class BufferBuilder:
    def __init__(self):
        self.blob = bytearray()
        self.views = []
        self.accessors = []

    def _add_view(self, data: bytes) -> int:
        while len(self.blob) % 4:
            self.blob += b"\x00"
        self.views.append({"buffer": 0, "byteOffset": len(self.blob),
                           "byteLength": len(data)})
        self.blob += data
        return len(self.views) - 1

    def add_f32(self, array, kind: str) -> int:
        a = np.ascontiguousarray(array, dtype="<f4")
        view = self._add_view(a.tobytes())
        acc = {"bufferView": view, "componentType": F32,
               "count": int(a.shape[0]), "type": kind}
        if kind == "VEC3":
            acc["min"] = [float(v) for v in a.min(axis=0)]
            acc["max"] = [float(v) for v in a.max(axis=0)]
        self.accessors.append(acc)
        return len(self.accessors) - 1

    def add_indices(self, tris) -> int:
        flat = np.asarray(tris).reshape(-1)
        if flat.size and flat.max() > 0xFFFF:
            data = flat.astype("<u4").tobytes()
            ctype = U32
        else:
            data = flat.astype("<u2").tobytes()
            ctype = U16
        view = self._add_view(data)
        self.accessors.append({"bufferView": view, "componentType": ctype,
                               "count": int(flat.size), "type": "SCALAR"})
        return len(self.accessors) - 1

    def data_uri(self) -> str:
        return ("data:application/octet-stream;base64,"
                + base64.b64encode(bytes(self.blob)).decode("ascii"))


def scene_to_gltf(scene) -> dict:
    buf = BufferBuilder()

    meshes = []
    for gi, geo in enumerate(scene.geometries):
        meshes.append({"name": f"mesh{gi}", "primitives": [{
            "attributes": {
                "POSITION": buf.add_f32(geo.positions, "VEC3"),
                "NORMAL": buf.add_f32(geo.normals, "VEC3"),
                "TEXCOORD_0": buf.add_f32(geo.uvs, "VEC2"),
            },
            "indices": buf.add_indices(geo.triangles),
        }]})

    materials = []
    for m in scene.materials:
        materials.append({"pbrMetallicRoughness": {
            "baseColorFactor": [float(c) for c in m.base_color] + [1.0],
            "metallicFactor": float(m.metallic),
            "roughnessFactor": float(m.roughness),
        }})

    cameras = []
    camera_by_node = {}
    for cam in scene.cameras:
        camera_by_node[cam.node] = len(cameras)
        cameras.append({"type": "perspective", "perspective": {
            "yfov": float(cam.vertical_fov),
            "znear": float(cam.near),
            "zfar": float(cam.far),
        }})

    lights = []
    light_nodes = []
    for li, light in enumerate(scene.lights):
        rgb = np.asarray(light.intensity, dtype=np.float64)
        strength = float(rgb.max()) if rgb.max() > 0 else 1.0
        lights.append({"type": "point",
                       "color": [float(c) for c in rgb / strength],
                       "intensity": strength})
        light_nodes.append({
            "name": f"light{li}",
            "translation": [float(v) for v in np.asarray(light.position)],
            "extensions": {"KHR_lights_punctual": {"light": li}},
        })

    nodes = []
    index_of = {n.name: i for i, n in enumerate(scene.nodes)}
    for n in scene.nodes:
        nd = {"name": n.name}
        if not np.array_equal(n.local, np.eye(4)):
            nd["matrix"] = [float(v) for v in np.asarray(n.local).flatten(order="F")]
        if n.mesh_instance is not None:
            gid, mid = n.mesh_instance
            nd["mesh"] = gid
            meshes[gid]["primitives"][0]["material"] = mid
        if n.name in camera_by_node:
            nd["camera"] = camera_by_node[n.name]
        children = [index_of[c.name] for c in scene.nodes if c.parent == n.name]
        if children:
            nd["children"] = children
        nodes.append(nd)
    roots = [i for i, n in enumerate(scene.nodes) if n.parent is None]
    for ln in light_nodes:
        roots.append(len(nodes))
        nodes.append(ln)

    doc = {
        "asset": {"version": "2.0", "generator": "softrender make_scenes"},
        "scene": 0,
        "scenes": [{"nodes": roots}],
        "nodes": nodes,
        "meshes": meshes,
        "materials": materials,
        "cameras": cameras,
        "accessors": buf.accessors,
        "bufferViews": buf.views,
        "buffers": [{"byteLength": len(buf.blob), "uri": buf.data_uri()}],
    }
    if lights:
        doc["extensions"] = {"KHR_lights_punctual": {"lights": lights}}
        doc["extensionsUsed"] = ["KHR_lights_punctual"]
    return doc


BUILDERS = {
    "triangle": make_triangle_scene,
    "demo": lambda: make_demo_scene(3),
    "bench": make_bench_scene,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default=str(Path(__file__).parent.parent / "scenes"))
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, build in BUILDERS.items():
        doc = scene_to_gltf(build())
        path = out / f"{name}.gltf"
        path.write_text(json.dumps(doc, indent=1) + "\n")
        print(f"wrote {path} ({path.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
