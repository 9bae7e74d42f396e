#pragma once

// Minimal PDF text extraction: object scanning (tolerant of broken xref
// tables), object streams, Flate/ASCIIHex/ASCII85 filters, the page tree in
// reading order, and ToUnicode CMaps. Layout fidelity is not a goal; the
// contract is that page text comes out in page order and, within a page, in
// content-stream order.

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bloomgate/error.hpp"
#include "bloomgate/text.hpp"

namespace bloomgate::pdf {

struct Object;
using Dict = std::vector<std::pair<std::string, Object>>;

struct Ref {
  int num = 0;
  int gen = 0;
  bool operator<(const Ref& o) const { return std::pair(num, gen) < std::pair(o.num, o.gen); }
};

struct Object {
  enum class Kind { Null, Bool, Number, String, Name, Array, Dictionary, Reference, Stream, Keyword };
  Kind kind = Kind::Null;
  double number = 0.0;
  bool boolean = false;
  std::string str;  // String bytes, Name (without slash), Keyword text, Stream raw bytes
  std::vector<Object> array;
  Dict dict;  // Dictionary entries, or the stream dictionary
  Ref ref;

  bool is(Kind k) const { return kind == k; }

  const Object* get(std::string_view key) const {
    for (const auto& [k, v] : dict) {
      if (k == key) return &v;
    }
    return nullptr;
  }
};

namespace detail {

inline bool is_pdf_space(char c) {
  return c == ' ' || c == '\n' || c == '\r' || c == '\t' || c == '\f' || c == '\0';
}

inline bool is_delimiter(char c) {
  return c == '(' || c == ')' || c == '<' || c == '>' || c == '[' || c == ']' || c == '{' ||
         c == '}' || c == '/' || c == '%';
}

inline int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

/// Tokenizer and object parser shared by file bodies, object streams,
/// content streams and CMaps.
class Lexer {
 public:
  explicit Lexer(std::string_view data, std::size_t pos = 0) : data_(data), pos_(pos) {}

  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = std::min(p, data_.size()); }
  bool at_end() {
    skip_space();
    return pos_ >= data_.size();
  }

  void skip_space() {
    while (pos_ < data_.size()) {
      char c = data_[pos_];
      if (is_pdf_space(c)) {
        ++pos_;
      } else if (c == '%') {
        while (pos_ < data_.size() && data_[pos_] != '\n' && data_[pos_] != '\r') ++pos_;
      } else {
        break;
      }
    }
  }

  /// Parses one object; returns a Keyword object for bare operators.
  Object next() {
    skip_space();
    if (pos_ >= data_.size()) throw Error(ErrorCode::MalformedInput, "unexpected end of PDF data");
    char c = data_[pos_];
    if (c == '/') return name();
    if (c == '(') return literal_string();
    if (c == '<') {
      if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '<') return dictionary();
      return hex_string();
    }
    if (c == '[') return array_object();
    if (c == ']' || c == '>' || c == ')' || c == '{' || c == '}') {
      ++pos_;
      Object k;
      k.kind = Object::Kind::Keyword;
      k.str = std::string(1, c);
      if (c == '>' && pos_ < data_.size() && data_[pos_] == '>') {
        ++pos_;
        k.str = ">>";
      }
      return k;
    }
    if (c == '+' || c == '-' || c == '.' || (c >= '0' && c <= '9')) return number_or_ref();
    return keyword();
  }

  std::string_view data() const { return data_; }

 private:
  Object name() {
    ++pos_;
    Object o;
    o.kind = Object::Kind::Name;
    while (pos_ < data_.size() && !is_pdf_space(data_[pos_]) && !is_delimiter(data_[pos_])) {
      char c = data_[pos_++];
      if (c == '#' && pos_ + 1 < data_.size() && hex_value(data_[pos_]) >= 0 &&
          hex_value(data_[pos_ + 1]) >= 0) {
        c = static_cast<char>(hex_value(data_[pos_]) * 16 + hex_value(data_[pos_ + 1]));
        pos_ += 2;
      }
      o.str.push_back(c);
    }
    return o;
  }

  Object literal_string() {
    ++pos_;
    Object o;
    o.kind = Object::Kind::String;
    int depth = 1;
    while (pos_ < data_.size()) {
      char c = data_[pos_++];
      if (c == '\\') {
        if (pos_ >= data_.size()) break;
        char e = data_[pos_++];
        switch (e) {
          case 'n': o.str.push_back('\n'); break;
          case 'r': o.str.push_back('\r'); break;
          case 't': o.str.push_back('\t'); break;
          case 'b': o.str.push_back('\b'); break;
          case 'f': o.str.push_back('\f'); break;
          case '\r':
            if (pos_ < data_.size() && data_[pos_] == '\n') ++pos_;
            break;
          case '\n': break;
          default:
            if (e >= '0' && e <= '7') {
              int v = e - '0';
              for (int i = 0; i < 2 && pos_ < data_.size() && data_[pos_] >= '0' && data_[pos_] <= '7'; ++i) {
                v = v * 8 + (data_[pos_++] - '0');
              }
              o.str.push_back(static_cast<char>(v & 0xFF));
            } else {
              o.str.push_back(e);
            }
        }
      } else if (c == '(') {
        ++depth;
        o.str.push_back(c);
      } else if (c == ')') {
        if (--depth == 0) return o;
        o.str.push_back(c);
      } else {
        o.str.push_back(c);
      }
    }
    throw Error(ErrorCode::MalformedInput, "unterminated PDF string");
  }

  Object hex_string() {
    ++pos_;
    Object o;
    o.kind = Object::Kind::String;
    int hi = -1;
    while (pos_ < data_.size() && data_[pos_] != '>') {
      int v = hex_value(data_[pos_++]);
      if (v < 0) continue;
      if (hi < 0) {
        hi = v;
      } else {
        o.str.push_back(static_cast<char>(hi * 16 + v));
        hi = -1;
      }
    }
    if (pos_ >= data_.size()) throw Error(ErrorCode::MalformedInput, "unterminated PDF hex string");
    ++pos_;
    if (hi >= 0) o.str.push_back(static_cast<char>(hi * 16));
    return o;
  }

  Object array_object() {
    ++pos_;
    Object o;
    o.kind = Object::Kind::Array;
    while (true) {
      skip_space();
      if (pos_ >= data_.size()) throw Error(ErrorCode::MalformedInput, "unterminated PDF array");
      if (data_[pos_] == ']') {
        ++pos_;
        return o;
      }
      o.array.push_back(next());
    }
  }

  Object dictionary() {
    pos_ += 2;
    Object o;
    o.kind = Object::Kind::Dictionary;
    while (true) {
      skip_space();
      if (pos_ + 1 < data_.size() && data_[pos_] == '>' && data_[pos_ + 1] == '>') {
        pos_ += 2;
        return o;
      }
      if (pos_ >= data_.size()) throw Error(ErrorCode::MalformedInput, "unterminated PDF dictionary");
      Object key = next();
      if (!key.is(Object::Kind::Name)) throw Error(ErrorCode::MalformedInput, "PDF dictionary key is not a name");
      o.dict.emplace_back(key.str, next());
    }
  }

  Object number_or_ref() {
    Object first = plain_number();
    if (first.number != static_cast<int>(first.number) || first.number < 0) return first;
    // Look ahead for "gen R".
    std::size_t save = pos_;
    skip_space();
    if (pos_ < data_.size() && data_[pos_] >= '0' && data_[pos_] <= '9') {
      Object second = plain_number();
      skip_space();
      if (pos_ < data_.size() && data_[pos_] == 'R' &&
          (pos_ + 1 >= data_.size() || is_pdf_space(data_[pos_ + 1]) || is_delimiter(data_[pos_ + 1]))) {
        ++pos_;
        Object r;
        r.kind = Object::Kind::Reference;
        r.ref = Ref{static_cast<int>(first.number), static_cast<int>(second.number)};
        return r;
      }
    }
    pos_ = save;
    return first;
  }

  Object plain_number() {
    std::size_t start = pos_;
    if (data_[pos_] == '+' || data_[pos_] == '-') ++pos_;
    while (pos_ < data_.size() && ((data_[pos_] >= '0' && data_[pos_] <= '9') || data_[pos_] == '.')) ++pos_;
    Object o;
    o.kind = Object::Kind::Number;
    std::string tok(data_.substr(start, pos_ - start));
    try {
      o.number = (tok == "+" || tok == "-" || tok == "." || tok.empty()) ? 0.0 : std::stod(tok);
    } catch (...) {
      o.number = 0.0;
    }
    return o;
  }

  Object keyword() {
    std::size_t start = pos_;
    while (pos_ < data_.size() && !is_pdf_space(data_[pos_]) && !is_delimiter(data_[pos_])) ++pos_;
    if (pos_ == start) ++pos_;
    std::string word(data_.substr(start, pos_ - start));
    Object o;
    if (word == "true" || word == "false") {
      o.kind = Object::Kind::Bool;
      o.boolean = word == "true";
    } else if (word == "null") {
      o.kind = Object::Kind::Null;
    } else {
      o.kind = Object::Kind::Keyword;
      o.str = std::move(word);
    }
    return o;
  }

  std::string_view data_;
  std::size_t pos_;
};

inline std::string inflate_bytes(std::string_view in) {
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) throw Error(ErrorCode::MalformedInput, "zlib init failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  std::string out;
  char buf[16384];
  int rc = Z_OK;
  while (rc == Z_OK) {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof(buf);
    rc = inflate(&zs, Z_NO_FLUSH);
    out.append(buf, sizeof(buf) - zs.avail_out);
    if (rc == Z_BUF_ERROR && zs.avail_in == 0) break;
  }
  inflateEnd(&zs);
  // Truncated streams are common in the wild; keep what decoded.
  if (rc != Z_STREAM_END && out.empty()) throw Error(ErrorCode::MalformedInput, "corrupt Flate stream");
  return out;
}

inline std::string ascii_hex_decode(std::string_view in) {
  std::string out;
  int hi = -1;
  for (char c : in) {
    if (c == '>') break;
    int v = hex_value(c);
    if (v < 0) continue;
    if (hi < 0) {
      hi = v;
    } else {
      out.push_back(static_cast<char>(hi * 16 + v));
      hi = -1;
    }
  }
  if (hi >= 0) out.push_back(static_cast<char>(hi * 16));
  return out;
}

inline std::string ascii85_decode(std::string_view in) {
  std::string out;
  std::uint32_t tuple = 0;
  int count = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    char c = in[i];
    if (c == '~') break;
    if (is_pdf_space(c)) continue;
    if (c == 'z' && count == 0) {
      out.append(4, '\0');
      continue;
    }
    if (c < '!' || c > 'u') throw Error(ErrorCode::MalformedInput, "bad ASCII85 data");
    tuple = tuple * 85 + static_cast<std::uint32_t>(c - '!');
    if (++count == 5) {
      for (int s = 3; s >= 0; --s) out.push_back(static_cast<char>((tuple >> (8 * s)) & 0xFF));
      tuple = 0;
      count = 0;
    }
  }
  if (count > 1) {
    for (int k = count; k < 5; ++k) tuple = tuple * 85 + 84;
    for (int s = 3; s > 3 - (count - 1); --s) out.push_back(static_cast<char>((tuple >> (8 * s)) & 0xFF));
  }
  return out;
}

/// WinAnsi code points for bytes 0x80..0x9F; other bytes map to Latin-1.
inline std::uint32_t win_ansi(unsigned char b) {
  static constexpr std::uint32_t kHigh[32] = {
      0x20AC, 0xFFFD, 0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021, 0x02C6, 0x2030, 0x0160,
      0x2039, 0x0152, 0xFFFD, 0x017D, 0xFFFD, 0xFFFD, 0x2018, 0x2019, 0x201C, 0x201D, 0x2022,
      0x2013, 0x2014, 0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0xFFFD, 0x017E, 0x0178};
  if (b >= 0x80 && b <= 0x9F) return kHigh[b - 0x80];
  return b;
}

struct ToUnicode {
  int code_bytes = 1;
  std::map<std::uint32_t, std::string> map;  // code -> UTF-8
};

inline std::string utf16be_to_utf8(std::string_view bytes) {
  std::string out;
  for (std::size_t i = 0; i + 1 < bytes.size(); i += 2) {
    std::uint32_t u = (static_cast<unsigned char>(bytes[i]) << 8) | static_cast<unsigned char>(bytes[i + 1]);
    if (u >= 0xD800 && u <= 0xDBFF && i + 3 < bytes.size()) {
      std::uint32_t lo = (static_cast<unsigned char>(bytes[i + 2]) << 8) | static_cast<unsigned char>(bytes[i + 3]);
      if (lo >= 0xDC00 && lo <= 0xDFFF) {
        u = 0x10000 + ((u - 0xD800) << 10) + (lo - 0xDC00);
        i += 2;
      }
    }
    text::append_utf8(out, u);
  }
  return out;
}

inline std::uint32_t code_of(std::string_view bytes) {
  std::uint32_t v = 0;
  for (char c : bytes) v = (v << 8) | static_cast<unsigned char>(c);
  return v;
}

inline ToUnicode parse_cmap(std::string_view data) {
  ToUnicode cmap;
  Lexer lex(data);
  std::vector<Object> operands;
  while (!lex.at_end()) {
    Object o;
    try {
      o = lex.next();
    } catch (const Error&) {
      break;
    }
    if (!o.is(Object::Kind::Keyword)) {
      operands.push_back(std::move(o));
      continue;
    }
    const std::string& op = o.str;
    if (op == "endcodespacerange") {
      if (!operands.empty() && operands.front().is(Object::Kind::String)) {
        cmap.code_bytes = std::max<int>(1, static_cast<int>(operands.front().str.size()));
      }
    } else if (op == "endbfchar") {
      for (std::size_t i = 0; i + 1 < operands.size(); i += 2) {
        if (operands[i].is(Object::Kind::String) && operands[i + 1].is(Object::Kind::String)) {
          cmap.map[code_of(operands[i].str)] = utf16be_to_utf8(operands[i + 1].str);
        }
      }
    } else if (op == "endbfrange") {
      for (std::size_t i = 0; i + 2 < operands.size(); i += 3) {
        const auto& lo = operands[i];
        const auto& hi = operands[i + 1];
        const auto& dst = operands[i + 2];
        if (!lo.is(Object::Kind::String) || !hi.is(Object::Kind::String)) continue;
        std::uint32_t a = code_of(lo.str);
        std::uint32_t b = code_of(hi.str);
        if (b < a || b - a > 0xFFFF) continue;
        if (dst.is(Object::Kind::String)) {
          std::string base = dst.str;
          for (std::uint32_t c = a; c <= b; ++c) {
            cmap.map[c] = utf16be_to_utf8(base);
            if (!base.empty()) {
              // Increment the last UTF-16 unit.
              auto& last = base.back();
              last = static_cast<char>(static_cast<unsigned char>(last) + 1);
            }
          }
        } else if (dst.is(Object::Kind::Array)) {
          for (std::uint32_t c = a; c <= b && c - a < dst.array.size(); ++c) {
            if (dst.array[c - a].is(Object::Kind::String)) cmap.map[c] = utf16be_to_utf8(dst.array[c - a].str);
          }
        }
      }
    }
    if (op.rfind("begin", 0) == 0 || op.rfind("end", 0) == 0) operands.clear();
  }
  return cmap;
}

}  // namespace detail

class Document {
 public:
  explicit Document(std::string_view bytes) : data_(bytes) {
    if (data_.substr(0, std::min<std::size_t>(data_.size(), 1024)).find("%PDF-") == std::string_view::npos) {
      throw Error(ErrorCode::MalformedInput, "missing %PDF header");
    }
    scan_objects();
    expand_object_streams();
    if (encrypted_) throw Error(ErrorCode::MalformedInput, "encrypted PDFs are not supported");
  }

  /// Text of each page, in page-tree order.
  std::vector<std::string> page_texts() const {
    std::vector<std::string> pages;
    const Object* root = root_ ? resolve_ptr(&*root_) : nullptr;
    if (!root || !root->is(Object::Kind::Dictionary)) root = find_catalog();
    if (!root) throw Error(ErrorCode::MalformedInput, "no document catalog");
    const Object* tree = resolve_ptr(root->get("Pages"));
    if (!tree) throw Error(ErrorCode::MalformedInput, "catalog has no page tree");
    std::set<const Object*> visited;
    walk_pages(*tree, nullptr, visited, pages);
    return pages;
  }

 private:
  void scan_objects() {
    // Objects are found by scanning for "N G obj" rather than trusting xref
    // offsets; later definitions (incremental updates) replace earlier ones.
    std::size_t pos = 0;
    while ((pos = data_.find("obj", pos)) != std::string_view::npos) {
      std::size_t kw = pos;
      pos += 3;
      if (kw > 0 && !detail::is_pdf_space(data_[kw - 1])) continue;
      if (pos < data_.size() && !detail::is_pdf_space(data_[pos]) && !detail::is_delimiter(data_[pos])) continue;
      // Walk back over "num gen ".
      std::size_t p = kw;
      auto back_digits = [&](std::size_t& q) {
        while (q > 0 && detail::is_pdf_space(data_[q - 1])) --q;
        std::size_t end = q;
        while (q > 0 && data_[q - 1] >= '0' && data_[q - 1] <= '9') --q;
        return end > q ? std::optional<int>(std::stoi(std::string(data_.substr(q, end - q)))) : std::nullopt;
      };
      auto gen = back_digits(p);
      if (!gen) continue;
      auto num = back_digits(p);
      if (!num) continue;
      try {
        detail::Lexer lex(data_, pos);
        Object obj = lex.next();
        lex.skip_space();
        if (data_.substr(lex.pos(), 6) == "stream" && obj.is(Object::Kind::Dictionary)) {
          obj = read_stream(std::move(obj), lex.pos() + 6);
        }
        note_special(obj);
        objects_[Ref{*num, *gen}] = std::move(obj);
      } catch (const Error&) {
        continue;
      }
    }
    // Classic trailers.
    pos = 0;
    while ((pos = data_.find("trailer", pos)) != std::string_view::npos) {
      pos += 7;
      try {
        detail::Lexer lex(data_, pos);
        Object t = lex.next();
        if (t.is(Object::Kind::Dictionary)) note_special(t);
      } catch (const Error&) {
      }
    }
  }

  void note_special(const Object& obj) {
    const Object* type = obj.get("Type");
    bool is_xref_stream = type && type->is(Object::Kind::Name) && type->str == "XRef";
    bool is_trailer = !type && obj.get("Root");
    if (is_xref_stream || is_trailer) {
      if (const Object* r = obj.get("Root")) root_ = *r;
      if (obj.get("Encrypt")) encrypted_ = true;
    }
  }

  Object read_stream(Object dict, std::size_t start) const {
    if (start < data_.size() && data_[start] == '\r') ++start;
    if (start < data_.size() && data_[start] == '\n') ++start;
    std::size_t end = std::string_view::npos;
    if (const Object* len = dict.get("Length"); len && len->is(Object::Kind::Number)) {
      auto n = static_cast<std::size_t>(len->number);
      if (start + n <= data_.size()) {
        std::size_t after = start + n;
        while (after < data_.size() && detail::is_pdf_space(data_[after])) ++after;
        if (data_.substr(after, 9) == "endstream") end = start + n;
      }
    }
    if (end == std::string_view::npos) {
      end = data_.find("endstream", start);
      if (end == std::string_view::npos) throw Error(ErrorCode::MalformedInput, "unterminated stream");
      if (end > start && data_[end - 1] == '\n') --end;
      if (end > start && data_[end - 1] == '\r') --end;
    }
    Object s;
    s.kind = Object::Kind::Stream;
    s.dict = std::move(dict.dict);
    s.str = std::string(data_.substr(start, end - start));
    return s;
  }

  void expand_object_streams() {
    std::vector<Object> streams;
    for (const auto& [ref, obj] : objects_) {
      const Object* type = obj.get("Type");
      if (obj.is(Object::Kind::Stream) && type && type->is(Object::Kind::Name) && type->str == "ObjStm") {
        streams.push_back(obj);
      }
    }
    for (const auto& stream : streams) {
      std::string body;
      try {
        body = decode(stream);
      } catch (const Error&) {
        continue;
      }
      const Object* n = stream.get("N");
      const Object* first = stream.get("First");
      if (!n || !first) continue;
      detail::Lexer header(body);
      std::vector<std::pair<int, std::size_t>> entries;
      for (int i = 0; i < static_cast<int>(n->number); ++i) {
        try {
          Object num = header.next();
          Object off = header.next();
          entries.emplace_back(static_cast<int>(num.number), static_cast<std::size_t>(off.number));
        } catch (const Error&) {
          break;
        }
      }
      for (const auto& [num, off] : entries) {
        Ref ref{num, 0};
        if (objects_.count(ref)) continue;
        try {
          detail::Lexer lex(body, static_cast<std::size_t>(first->number) + off);
          Object obj = lex.next();
          note_special(obj);
          objects_[ref] = std::move(obj);
        } catch (const Error&) {
        }
      }
    }
  }

  const Object* resolve_ptr(const Object* o, int depth = 0) const {
    if (!o || depth > 32) return nullptr;
    if (!o->is(Object::Kind::Reference)) return o;
    auto it = objects_.find(o->ref);
    if (it == objects_.end()) {
      // Generation mismatches are tolerated.
      for (const auto& [ref, obj] : objects_) {
        if (ref.num == o->ref.num) return resolve_ptr(&obj, depth + 1);
      }
      return nullptr;
    }
    return resolve_ptr(&it->second, depth + 1);
  }

  const Object* find_catalog() const {
    for (const auto& [ref, obj] : objects_) {
      const Object* type = obj.get("Type");
      if (type && type->is(Object::Kind::Name) && type->str == "Catalog") return &obj;
    }
    return nullptr;
  }

  std::string decode(const Object& stream) const {
    std::vector<std::string> filters;
    if (const Object* f = resolve_ptr(stream.get("Filter"))) {
      if (f->is(Object::Kind::Name)) filters.push_back(f->str);
      if (f->is(Object::Kind::Array)) {
        for (const auto& e : f->array) {
          if (const Object* r = resolve_ptr(&e); r && r->is(Object::Kind::Name)) filters.push_back(r->str);
        }
      }
    }
    std::string data = stream.str;
    for (const auto& f : filters) {
      if (f == "FlateDecode" || f == "Fl") {
        data = detail::inflate_bytes(data);
      } else if (f == "ASCIIHexDecode" || f == "AHx") {
        data = detail::ascii_hex_decode(data);
      } else if (f == "ASCII85Decode" || f == "A85") {
        data = detail::ascii85_decode(data);
      } else {
        throw Error(ErrorCode::MalformedInput, "unsupported stream filter " + f);
      }
    }
    return data;
  }

  void walk_pages(const Object& node, const Object* inherited_resources, std::set<const Object*>& visited,
                  std::vector<std::string>& pages) const {
    if (!visited.insert(&node).second) return;
    const Object* resources = resolve_ptr(node.get("Resources"));
    if (!resources) resources = inherited_resources;
    if (const Object* kids = resolve_ptr(node.get("Kids")); kids && kids->is(Object::Kind::Array)) {
      for (const auto& kid : kids->array) {
        if (const Object* k = resolve_ptr(&kid)) walk_pages(*k, resources, visited, pages);
      }
      return;
    }
    pages.push_back(page_text(node, resources));
  }

  std::map<std::string, detail::ToUnicode> fonts_of(const Object* resources) const {
    std::map<std::string, detail::ToUnicode> fonts;
    if (!resources) return fonts;
    const Object* font_dict = resolve_ptr(resources->get("Font"));
    if (!font_dict) return fonts;
    for (const auto& [name, ref] : font_dict->dict) {
      const Object* font = resolve_ptr(&ref);
      if (!font) continue;
      detail::ToUnicode tu;
      const Object* subtype = font->get("Subtype");
      if (subtype && subtype->is(Object::Kind::Name) && subtype->str == "Type0") tu.code_bytes = 2;
      if (const Object* cmap = resolve_ptr(font->get("ToUnicode")); cmap && cmap->is(Object::Kind::Stream)) {
        try {
          auto parsed = detail::parse_cmap(decode(*cmap));
          if (!parsed.map.empty()) {
            if (tu.code_bytes == 2 && parsed.code_bytes == 1) parsed.code_bytes = 2;
            tu = std::move(parsed);
          }
        } catch (const Error&) {
        }
      }
      fonts.emplace(name, std::move(tu));
    }
    return fonts;
  }

  std::string page_text(const Object& page, const Object* resources) const {
    std::string content;
    const Object* contents = resolve_ptr(page.get("Contents"));
    auto append = [&](const Object* s) {
      if (s && s->is(Object::Kind::Stream)) {
        content += decode(*s);
        content.push_back('\n');
      }
    };
    if (contents && contents->is(Object::Kind::Array)) {
      for (const auto& c : contents->array) append(resolve_ptr(&c));
    } else {
      append(contents);
    }
    return render_content(content, fonts_of(resources));
  }

  static std::string decode_string(const std::string& bytes, const detail::ToUnicode* font) {
    std::string out;
    if (font && !font->map.empty()) {
      auto step = static_cast<std::size_t>(font->code_bytes);
      for (std::size_t i = 0; i + step <= bytes.size(); i += step) {
        auto it = font->map.find(detail::code_of(std::string_view(bytes).substr(i, step)));
        if (it != font->map.end()) out += it->second;
      }
      return out;
    }
    if (font && font->code_bytes == 2) {
      // Identity-H without a ToUnicode map: nothing reliable to emit.
      return out;
    }
    for (char c : bytes) text::append_utf8(out, detail::win_ansi(static_cast<unsigned char>(c)));
    return out;
  }

  static std::string render_content(std::string_view content,
                                    const std::map<std::string, detail::ToUnicode>& fonts) {
    std::string out;
    detail::Lexer lex(content);
    std::vector<Object> operands;
    const detail::ToUnicode* font = nullptr;
    std::optional<double> line_y;
    auto newline = [&] {
      while (!out.empty() && out.back() == ' ') out.pop_back();
      if (!out.empty() && out.back() != '\n') out.push_back('\n');
    };
    auto show = [&](const Object& s) {
      if (s.is(Object::Kind::String)) out += decode_string(s.str, font);
    };
    while (!lex.at_end()) {
      Object o;
      try {
        o = lex.next();
      } catch (const Error&) {
        break;
      }
      if (!o.is(Object::Kind::Keyword)) {
        operands.push_back(std::move(o));
        continue;
      }
      const std::string& op = o.str;
      auto num = [&](std::size_t from_end) {
        return operands.size() >= from_end && operands[operands.size() - from_end].is(Object::Kind::Number)
                   ? operands[operands.size() - from_end].number
                   : 0.0;
      };
      if (op == "BI") {
        // Skip inline image data through EI.
        auto ei = content.find("EI", lex.pos());
        while (ei != std::string_view::npos &&
               !(ei > 0 && detail::is_pdf_space(content[ei - 1]) &&
                 (ei + 2 >= content.size() || detail::is_pdf_space(content[ei + 2])))) {
          ei = content.find("EI", ei + 2);
        }
        lex.seek(ei == std::string_view::npos ? content.size() : ei + 2);
      } else if (op == "Tf") {
        if (operands.size() >= 2 && operands[operands.size() - 2].is(Object::Kind::Name)) {
          auto it = fonts.find(operands[operands.size() - 2].str);
          font = it == fonts.end() ? nullptr : &it->second;
        }
      } else if (op == "Td" || op == "TD") {
        double ty = num(1);
        double tx = num(2);
        if (ty != 0.0) {
          newline();
        } else if (tx > 0.0 && !out.empty() && out.back() != ' ' && out.back() != '\n') {
          out.push_back(' ');
        }
      } else if (op == "Tm") {
        double y = num(1);
        if (line_y && *line_y != y) newline();
        line_y = y;
      } else if (op == "T*") {
        newline();
      } else if (op == "Tj") {
        if (!operands.empty()) show(operands.back());
      } else if (op == "'" || op == "\"") {
        newline();
        if (!operands.empty()) show(operands.back());
      } else if (op == "TJ") {
        if (!operands.empty() && operands.back().is(Object::Kind::Array)) {
          for (const auto& e : operands.back().array) {
            if (e.is(Object::Kind::Number)) {
              if (e.number < -180.0 && !out.empty() && out.back() != ' ') out.push_back(' ');
            } else {
              show(e);
            }
          }
        }
      } else if (op == "ET") {
        if (!out.empty() && out.back() != '\n' && out.back() != ' ') out.push_back(' ');
      }
      operands.clear();
    }
    while (!out.empty() && (out.back() == ' ' || out.back() == '\n')) out.pop_back();
    return out;
  }

  std::string_view data_;
  std::map<Ref, Object> objects_;
  std::optional<Object> root_;
  bool encrypted_ = false;
};

/// Extracts page texts in page order.
inline std::vector<std::string> extract_pages(std::string_view bytes) {
  Document doc(bytes);
  return doc.page_texts();
}

}  // namespace bloomgate::pdf
