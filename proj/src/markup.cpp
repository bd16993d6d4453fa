#include "spo/markup.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace spo {

namespace {

constexpr std::array<std::string_view, 12> kVoidTags = {"input", "image", "icon",   "import", "include",  "br",
                                                        "img",   "hr",    "meta",   "link",   "progress", "slider"};
constexpr std::array<std::string_view, 3> kRawTags = {"wxs", "script", "style"};

bool contains(auto const& arr, std::string_view v) { return std::find(arr.begin(), arr.end(), v) != arr.end(); }

bool name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':' || c == '.' ||
         static_cast<unsigned char>(c) >= 0x80;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void append_cp(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    std::string_view ent = s.substr(i + 1, semi - i - 1);
    if (ent == "lt") out += '<';
    else if (ent == "gt") out += '>';
    else if (ent == "amp") out += '&';
    else if (ent == "quot") out += '"';
    else if (ent == "apos") out += '\'';
    else if (ent == "nbsp") out += ' ';
    else if (ent.size() > 1 && ent[0] == '#') {
      try {
        unsigned long cp = (ent[1] == 'x' || ent[1] == 'X') ? std::stoul(std::string(ent.substr(2)), nullptr, 16)
                                                            : std::stoul(std::string(ent.substr(1)));
        append_cp(out, cp);
      } catch (const std::exception&) {
        out.append(s.substr(i, semi - i + 1));
      }
    } else {
      out.append(s.substr(i, semi - i + 1));
    }
    i = semi;
  }
  return out;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

class MarkupParser {
 public:
  explicit MarkupParser(std::string_view src) : src_(src) {}

  MarkupDoc run() {
    doc_.nodes[0].span = {0, static_cast<std::uint32_t>(src_.size()), 1, 1};
    stack_.push_back(0);
    while (pos_ < src_.size()) {
      if (src_[pos_] == '<') {
        if (starts("<!--")) comment();
        else if (starts("</")) closing_tag();
        else if (pos_ + 1 < src_.size() && (std::isalpha(static_cast<unsigned char>(src_[pos_ + 1])) ||
                                             src_[pos_ + 1] == '_'))
          opening_tag();
        else if (starts("<!") || starts("<?")) declaration();
        else text();
      } else {
        text();
      }
    }
    while (stack_.size() > 1) {
      doc_.repairs.push_back("auto-closed <" + doc_.nodes[stack_.back()].tag + "> at end of input");
      close_top(static_cast<std::uint32_t>(src_.size()));
    }
    return std::move(doc_);
  }

 private:
  bool starts(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i, ++pos_) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else if ((static_cast<unsigned char>(src_[pos_]) & 0xC0) != 0x80) {
        ++col_;
      }
    }
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance(1);
  }

  Span here() const { return {static_cast<std::uint32_t>(pos_), static_cast<std::uint32_t>(pos_), line_, col_}; }

  int add_node(MarkupNode n) {
    int parent = stack_.back();
    n.parent = parent;
    doc_.nodes.push_back(std::move(n));
    int idx = static_cast<int>(doc_.nodes.size() - 1);
    doc_.nodes[static_cast<std::size_t>(parent)].children.push_back(idx);
    return idx;
  }

  void close_top(std::uint32_t end) {
    doc_.nodes[static_cast<std::size_t>(stack_.back())].span.end = end;
    stack_.pop_back();
  }

  void comment() {
    Span s = here();
    auto end = src_.find("-->", pos_ + 4);
    if (end == std::string_view::npos) throw ParseError("unterminated comment", s.line, s.col);
    advance(end + 3 - pos_);
  }

  void declaration() {
    auto end = src_.find('>', pos_);
    if (end == std::string_view::npos) end = src_.size() - 1;
    advance(end + 1 - pos_);
  }

  void text() {
    Span s = here();
    std::size_t start = pos_;
    advance(1);
    while (pos_ < src_.size() && src_[pos_] != '<') {
      // keep {{ a < b }} inside text
      if (starts("{{")) {
        auto close = src_.find("}}", pos_);
        if (close != std::string_view::npos) {
          advance(close + 2 - pos_);
          continue;
        }
      }
      advance(1);
    }
    std::string_view raw = src_.substr(start, pos_ - start);
    if (blank(raw)) return;
    MarkupNode n;
    n.kind = MarkupNode::Kind::Text;
    n.text = decode_entities(raw);
    s.end = static_cast<std::uint32_t>(pos_);
    n.span = s;
    add_node(std::move(n));
  }

  std::string read_name() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && name_char(src_[pos_])) advance(1);
    return std::string(src_.substr(start, pos_ - start));
  }

  void opening_tag() {
    Span s = here();
    advance(1);
    MarkupNode n;
    n.tag = lower(read_name());
    bool self_closing = false;
    for (;;) {
      skip_space();
      if (pos_ >= src_.size()) throw ParseError("unterminated tag <" + n.tag + ">", s.line, s.col);
      if (starts("/>")) {
        advance(2);
        self_closing = true;
        break;
      }
      if (src_[pos_] == '>') {
        advance(1);
        break;
      }
      if (src_[pos_] == '<') {
        doc_.repairs.push_back("unclosed start tag <" + n.tag + ">");
        break;
      }
      MarkupAttr a;
      std::size_t name_start = pos_;
      while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(src_[pos_])) && src_[pos_] != '=' &&
             src_[pos_] != '>' && !starts("/>"))
        advance(1);
      a.name = std::string(src_.substr(name_start, pos_ - name_start));
      if (a.name.empty()) {
        advance(1);
        continue;
      }
      skip_space();
      if (pos_ < src_.size() && src_[pos_] == '=') {
        advance(1);
        skip_space();
        if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'')) {
          char q = src_[pos_];
          Span qs = here();
          auto close = src_.find(q, pos_ + 1);
          if (close == std::string_view::npos) throw ParseError("unterminated attribute value", qs.line, qs.col);
          a.value = decode_entities(src_.substr(pos_ + 1, close - pos_ - 1));
          advance(close + 1 - pos_);
        } else {
          std::size_t vs = pos_;
          while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(src_[pos_])) && src_[pos_] != '>' &&
                 !starts("/>"))
            advance(1);
          a.value = decode_entities(src_.substr(vs, pos_ - vs));
        }
      }
      n.attrs.push_back(std::move(a));
    }
    s.end = static_cast<std::uint32_t>(pos_);
    n.span = s;
    std::string tag = n.tag;
    int idx = add_node(std::move(n));
    if (self_closing) return;

    if (contains(kRawTags, tag)) {
      std::string close = "</" + tag;
      auto end = src_.find(close, pos_);
      if (end == std::string_view::npos) {
        doc_.repairs.push_back("unterminated <" + tag + "> block");
        end = src_.size();
      }
      // script/style bodies are skipped, they are not page text
      advance(end - pos_);
      if (pos_ < src_.size()) {
        auto gt = src_.find('>', pos_);
        advance((gt == std::string_view::npos ? src_.size() : gt + 1) - pos_);
      }
      doc_.nodes[static_cast<std::size_t>(idx)].span.end = static_cast<std::uint32_t>(pos_);
      return;
    }

    if (contains(kVoidTags, tag)) {
      std::size_t save = pos_;
      auto save_line = line_, save_col = col_;
      skip_space();
      if (starts("</" + tag)) {
        auto gt = src_.find('>', pos_);
        advance((gt == std::string_view::npos ? src_.size() : gt + 1) - pos_);
        doc_.nodes[static_cast<std::size_t>(idx)].span.end = static_cast<std::uint32_t>(pos_);
        return;
      }
      pos_ = save;
      line_ = save_line;
      col_ = save_col;
      doc_.repairs.push_back("auto-closed <" + tag + "> without end tag");
      return;
    }
    stack_.push_back(idx);
  }

  void closing_tag() {
    Span s = here();
    advance(2);
    std::string tag = lower(read_name());
    auto gt = src_.find('>', pos_);
    if (gt == std::string_view::npos) throw ParseError("unterminated closing tag </" + tag + ">", s.line, s.col);
    advance(gt + 1 - pos_);
    auto end = static_cast<std::uint32_t>(pos_);
    for (std::size_t k = stack_.size(); k-- > 1;) {
      if (doc_.nodes[static_cast<std::size_t>(stack_[k])].tag != tag) continue;
      while (stack_.size() - 1 > k) {
        doc_.repairs.push_back("auto-closed <" + doc_.nodes[static_cast<std::size_t>(stack_.back())].tag +
                               "> before </" + tag + ">");
        close_top(s.begin);
      }
      close_top(end);
      return;
    }
    doc_.repairs.push_back("ignored stray </" + tag + ">");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::uint32_t line_ = 1;
  std::uint32_t col_ = 1;
  MarkupDoc doc_;
  std::vector<int> stack_;
};

}  // namespace

const std::string* MarkupNode::attr(std::string_view name) const {
  for (const auto& a : attrs)
    if (a.name == name) return &a.value;
  return nullptr;
}

std::string MarkupDoc::text_content(int i) const {
  std::string out;
  auto visit = [&](auto&& self, int k) -> void {
    const auto& n = at(k);
    if (!n.is_element()) {
      auto b = n.text.find_first_not_of(" \t\r\n");
      if (b == std::string::npos) return;
      auto e = n.text.find_last_not_of(" \t\r\n");
      if (!out.empty()) out += ' ';
      out += n.text.substr(b, e - b + 1);
      return;
    }
    if (contains(kRawTags, n.tag)) return;
    for (int c : n.children) self(self, c);
  };
  visit(visit, i);
  return out;
}

std::vector<int> MarkupDoc::elements() const {
  std::vector<int> out;
  auto visit = [&](auto&& self, int k) -> void {
    for (int c : at(k).children) {
      if (!at(c).is_element()) continue;
      out.push_back(c);
      self(self, c);
    }
  };
  visit(visit, 0);
  return out;
}

MarkupDoc parse_markup(std::string_view src) { return MarkupParser(src).run(); }

std::string strip_mustache(std::string_view s) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    auto open = s.find("{{", i);
    if (open == std::string_view::npos) {
      out.append(s.substr(i));
      break;
    }
    out.append(s.substr(i, open - i));
    auto close = s.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(s.substr(open));
      break;
    }
    out += ' ';
    i = close + 2;
  }
  return out;
}

}  // namespace spo
