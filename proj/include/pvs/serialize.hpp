#pragma once

#include <cstring>
#include <string>

#include <json.hpp>

#include "pvs/mask.hpp"
#include "pvs/memory_bank.hpp"
#include "pvs/prompts.hpp"

namespace pvs {

using json = nlohmann::json;

// --------------------------------------------------------------------------
// base64 (for opaque feature payloads)
// --------------------------------------------------------------------------

namespace detail {

inline constexpr char kB64Alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string base64_encode(const std::uint8_t* data, std::size_t len) {
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (std::size_t i = 0; i < len; i += 3) {
        std::uint32_t v = data[i] << 16;
        if (i + 1 < len) v |= data[i + 1] << 8;
        if (i + 2 < len) v |= data[i + 2];
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(i + 1 < len ? kB64Alphabet[(v >> 6) & 63] : '=');
        out.push_back(i + 2 < len ? kB64Alphabet[v & 63] : '=');
    }
    return out;
}

inline std::vector<std::uint8_t> base64_decode(const std::string& s) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    if (s.size() % 4 != 0) throw std::runtime_error("base64: length not a multiple of 4");
    std::vector<std::uint8_t> out;
    out.reserve(s.size() / 4 * 3);
    for (std::size_t i = 0; i < s.size(); i += 4) {
        int a = value_of(s[i]), b = value_of(s[i + 1]);
        int c = s[i + 2] == '=' ? 0 : value_of(s[i + 2]);
        int d = s[i + 3] == '=' ? 0 : value_of(s[i + 3]);
        if (a < 0 || b < 0 || c < 0 || d < 0) throw std::runtime_error("base64: invalid character");
        std::uint32_t v = (a << 18) | (b << 12) | (c << 6) | d;
        out.push_back((v >> 16) & 0xff);
        if (s[i + 2] != '=') out.push_back((v >> 8) & 0xff);
        if (s[i + 3] != '=') out.push_back(v & 0xff);
    }
    return out;
}

inline std::string doubles_to_base64(const std::vector<double>& v) {
    // little-endian IEEE 754 payload; this is an opaque blob, not a schema
    std::vector<std::uint8_t> bytes(v.size() * sizeof(double));
    std::memcpy(bytes.data(), v.data(), bytes.size());
    return base64_encode(bytes.data(), bytes.size());
}

inline std::vector<double> doubles_from_base64(const std::string& s) {
    std::vector<std::uint8_t> bytes = base64_decode(s);
    if (bytes.size() % sizeof(double) != 0) throw std::runtime_error("base64: payload is not a double array");
    std::vector<double> v(bytes.size() / sizeof(double));
    std::memcpy(v.data(), bytes.data(), bytes.size());
    return v;
}

}  // namespace detail

// --------------------------------------------------------------------------
// RLE masks: {"size":[h,w],"counts":[...]}
// --------------------------------------------------------------------------

inline json rle_to_json(const RleMask& r) {
    return json{{"size", {r.height, r.width}}, {"counts", r.counts}};
}

inline RleMask rle_from_json(const json& j) {
    RleMask r;
    r.height = j.at("size").at(0).get<int>();
    r.width = j.at("size").at(1).get<int>();
    r.counts = j.at("counts").get<std::vector<std::uint32_t>>();
    rle_validate(r);
    return r;
}

// --------------------------------------------------------------------------
// Prompts and prompt logs
// --------------------------------------------------------------------------

inline json prompt_to_json(const Prompt& p) {
    json j{{"frame", p.frame_idx}};
    if (p.is_click()) {
        const Click& c = p.click();
        j["type"] = "click";
        j["data"] = {{"row", c.row}, {"col", c.col}, {"polarity", c.polarity == Polarity::positive ? "positive" : "negative"}};
    } else if (p.is_box()) {
        const Box2D& b = p.box();
        j["type"] = "box";
        j["data"] = {{"r0", b.r0}, {"c0", b.c0}, {"r1", b.r1}, {"c1", b.c1}};
    } else {
        j["type"] = "mask";
        j["data"] = rle_to_json(rle_encode(p.mask()));
    }
    return j;
}

inline Prompt prompt_from_json(const json& j) {
    Prompt p;
    p.frame_idx = j.at("frame").get<int>();
    const std::string type = j.at("type").get<std::string>();
    const json& d = j.at("data");
    if (type == "click") {
        Click c;
        c.row = d.at("row").get<int>();
        c.col = d.at("col").get<int>();
        c.polarity = d.at("polarity").get<std::string>() == "positive" ? Polarity::positive : Polarity::negative;
        p.payload = c;
    } else if (type == "box") {
        p.payload = Box2D{d.at("r0").get<int>(), d.at("c0").get<int>(), d.at("r1").get<int>(), d.at("c1").get<int>()};
    } else if (type == "mask") {
        p.payload = rle_decode(rle_from_json(d));
    } else {
        throw std::runtime_error("prompt_from_json: unknown prompt type '" + type + "'");
    }
    return p;
}

inline json prompt_log_to_json(const PromptLog& log) {
    json arr = json::array();
    for (const auto& lp : log) {
        json j = prompt_to_json(lp.prompt);
        j["round"] = lp.round;
        arr.push_back(std::move(j));
    }
    return arr;
}

inline PromptLog prompt_log_from_json(const json& arr) {
    PromptLog log;
    for (const auto& j : arr) log.push_back({j.at("round").get<int>(), prompt_from_json(j)});
    return log;
}

// --------------------------------------------------------------------------
// Memory bank snapshots (trace debugging; feature payloads stay opaque)
// --------------------------------------------------------------------------

inline json memory_entry_to_json(const MemoryEntry& e) {
    json prompts = json::array();
    for (const auto& p : e.prompts) prompts.push_back(prompt_to_json(p));
    return json{{"frame", e.frame_idx},
                {"mask", rle_to_json(e.mask)},
                {"feature", e.feature ? json(detail::doubles_to_base64(*e.feature)) : json(nullptr)},
                {"occluded", e.occluded},
                {"prompted", e.is_prompted},
                {"prompts", std::move(prompts)}};
}

inline MemoryEntry memory_entry_from_json(const json& j) {
    MemoryEntry e;
    e.frame_idx = j.at("frame").get<int>();
    e.mask = rle_from_json(j.at("mask"));
    if (!j.at("feature").is_null()) e.feature = detail::doubles_from_base64(j.at("feature").get<std::string>());
    e.occluded = j.at("occluded").get<bool>();
    e.is_prompted = j.at("prompted").get<bool>();
    for (const auto& p : j.at("prompts")) e.prompts.push_back(prompt_from_json(p));
    return e;
}

inline json bank_snapshot(const MemoryBank& bank) {
    json recent = json::array(), prompted = json::array(), pointers = json::array();
    for (const auto& e : bank.recent()) recent.push_back(memory_entry_to_json(e));
    for (const auto& e : bank.prompted()) prompted.push_back(memory_entry_to_json(e));
    for (const auto& p : bank.pointers())
        pointers.push_back(json{{"frame", p.frame_idx}, {"dim", p.vec.size()}, {"data", detail::doubles_to_base64(p.vec)}});
    return json{{"schema", "pvs-bank/1"},
                {"recent_capacity", bank.recent_capacity()},
                {"prompted_capacity", bank.prompted_capacity()},
                {"recent", std::move(recent)},
                {"prompted", std::move(prompted)},
                {"pointers", std::move(pointers)}};
}

inline MemoryBank bank_restore(const json& j) {
    if (j.at("schema").get<std::string>() != "pvs-bank/1")
        throw std::runtime_error("bank_restore: unknown snapshot schema");
    std::vector<MemoryEntry> recent, prompted;
    for (const auto& e : j.at("recent")) recent.push_back(memory_entry_from_json(e));
    for (const auto& e : j.at("prompted")) prompted.push_back(memory_entry_from_json(e));
    std::vector<ObjectPointer> pointers;
    for (const auto& p : j.at("pointers")) {
        ObjectPointer op;
        op.frame_idx = p.at("frame").get<int>();
        op.vec = detail::doubles_from_base64(p.at("data").get<std::string>());
        if (op.vec.size() != p.at("dim").get<std::size_t>())
            throw std::runtime_error("bank_restore: pointer dim mismatch");
        pointers.push_back(std::move(op));
    }
    return MemoryBank::restore(j.at("recent_capacity").get<int>(), j.at("prompted_capacity").get<int>(),
                               std::move(recent), std::move(prompted), std::move(pointers));
}

}  // namespace pvs
