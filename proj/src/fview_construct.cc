#include "qle/errors.h"
#include "qle/fview.h"
#include "qle/runtime.h"

namespace qle {

Proc<FView> construct_fview(PartyContext& ctx, int h, Label x, LabelTransform transform) {
  FView current = FView::leaf(x);
  for (int j = 1; j <= h; ++j) {
    const BitString body = serialize(current);
    for (int p = 1; p <= ctx.out_degree(); ++p) {
      Message msg;
      msg.bits.push_varint(static_cast<std::uint64_t>(p));
      msg.bits.append(body);
      msg.sections.emplace_back("fview", body.size());
      ctx.send(p, std::move(msg));
    }
    co_await ctx.end_round();

    std::vector<std::pair<EdgeLabel, FView>> children;
    for (int p = 1; p <= ctx.in_degree(); ++p) {
      const Message* msg = ctx.received(p);
      if (!msg) throw ProtocolError("f-view construction: no message on in-port " + std::to_string(p));
      BitReader in(msg->bits);
      const auto peer_port = static_cast<std::uint32_t>(in.read_varint());
      FView child = deserialize(in);
      if (!in.done()) throw DecodeError("trailing bits after f-view");
      if (transform) child = transform(p, std::move(child));
      children.emplace_back(EdgeLabel{static_cast<std::uint32_t>(p), peer_port}, std::move(child));
    }
    current = minimize(FView::attach(x, children));
  }
  co_return current;
}

}  // namespace qle
