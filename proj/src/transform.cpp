#include <algorithm>

#include "munity/lang.hpp"

namespace munity {

namespace {

// Splits `items` into the non-reactive remainder (returned in place) and the
// reactive statements rewritten as guarded ones. Families keep their shape on
// both sides; families left empty are dropped.
std::vector<Item> extract_reactive(std::vector<Item>& items, int& moved) {
  std::vector<Item> taken;
  std::vector<Item> kept;
  for (auto& it : items) {
    if (it.kind == Item::Kind::Stmt && it.stmt.reactive) {
      it.stmt.reactive = false;
      taken.push_back(std::move(it));
      ++moved;
    } else if (it.kind == Item::Kind::Family) {
      Item fam = it;
      fam.children = extract_reactive(it.children, moved);
      if (!fam.children.empty()) taken.push_back(std::move(fam));
      if (!it.children.empty()) kept.push_back(std::move(it));
    } else {
      kept.push_back(std::move(it));
    }
  }
  items = std::move(kept);
  return taken;
}

void count_items(const std::vector<Item>& items, int& n) {
  for_each_statement(items, [&](const Statement& s) { n += s.reactive ? 1 : 0; });
}

}  // namespace

int count_reactive(const SystemDef& sys) {
  int n = 0;
  for (const auto& p : sys.programs) {
    for (const auto& b : p.blocks) count_items(b.items, n);
  }
  for (const auto& b : sys.interactions) count_items(b.items, n);
  return n;
}

SystemDef eliminate_reacts_to(const SystemDef& sys, int* moved) {
  int count = 0;
  SystemDef out = sys;
  if (count_reactive(sys) == 0) {
    if (moved) *moved = 0;
    return out;
  }
  int top = 0;
  for (const auto& p : sys.programs) {
    for (const auto& b : p.blocks) top = std::max(top, b.priority);
  }
  int highest_program = top;
  for (const auto& b : sys.interactions) {
    if (b.header) top = std::max(top, b.priority);
  }
  top = std::max(top, 1) + 1;

  auto rewrite = [&](std::vector<PriorityBlock>& blocks, int implicit_priority) {
    std::vector<Item> lifted;
    for (auto& b : blocks) {
      auto taken = extract_reactive(b.items, count);
      lifted.insert(lifted.end(), std::make_move_iterator(taken.begin()),
                    std::make_move_iterator(taken.end()));
    }
    if (lifted.empty()) return;
    // Every block gets an explicit header so the new top block can coexist
    // with a formerly implicit one.
    for (auto& b : blocks) {
      if (!b.header) b.priority = implicit_priority;
      b.header = true;
    }
    blocks.erase(std::remove_if(blocks.begin(), blocks.end(),
                                [](const PriorityBlock& b) { return b.items.empty(); }),
                 blocks.end());
    PriorityBlock nb;
    nb.priority = top;
    nb.header = true;
    nb.items = std::move(lifted);
    blocks.push_back(std::move(nb));
  };

  for (auto& p : out.programs) rewrite(p.blocks, 1);
  rewrite(out.interactions, std::max(highest_program, 1));
  if (moved) *moved = count;
  return out;
}

Model inline_inhibitions(Model m) {
  for (auto& u : m.units) {
    for (const auto& inh : u.inhibitors) {
      Expr neg = Expr::unary(Op::Not, inh);
      u.guard = u.guard ? Expr::binary(Op::And, u.guard, neg) : neg;
    }
    u.inhibitors.clear();
  }
  return m;
}

}  // namespace munity
