// Small DOM construction helper; keeps the views free of innerHTML.

type Child = Node | string | null | undefined;

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: Child[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [name, value] of Object.entries(attrs)) {
    if (name === "class") {
      node.className = value;
    } else {
      node.setAttribute(name, value);
    }
  }
  for (const child of children) {
    if (child === null || child === undefined) continue;
    node.append(child);
  }
  return node;
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) {
    node.removeChild(node.firstChild);
  }
}

/** Replace `node`'s children with an inline error panel. */
export function showError(node: HTMLElement, code: string, message: string): void {
  clear(node);
  node.append(
    el("div", { class: "error-state", role: "alert" }, el("strong", {}, code), ` ${message}`),
  );
}

// Selection is applied by assigning select.value after all options exist;
// flagging options while they are detached does not survive insertion in
// every DOM implementation.
export function option(value: string, label: string): HTMLOptionElement {
  return el("option", { value }, label);
}
