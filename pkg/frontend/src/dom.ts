/** Small DOM construction helpers; no framework, no templates. */

export type Child = Node | string | null | undefined;

type Attrs = Record<string, string | boolean | EventListener>;

/**
 * Build an element. Attribute keys starting with "on" register event
 * listeners ("onclick" listens for "click"), boolean values toggle
 * presence attributes, everything else is set verbatim.
 */
export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Attrs = {},
  ...children: Child[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === "function") {
      node.addEventListener(key.replace(/^on/, ""), value);
    } else if (typeof value === "boolean") {
      if (value) node.setAttribute(key, "");
    } else {
      node.setAttribute(key, value);
    }
  }
  append(node, ...children);
  return node;
}

export function append(node: HTMLElement, ...children: Child[]): void {
  for (const child of children) {
    if (child === null || child === undefined) continue;
    node.append(child instanceof Node ? child : document.createTextNode(child));
  }
}

export function clear(node: HTMLElement): void {
  node.replaceChildren();
}
