/** Heading dial: a 0-359 degree slider that commits on change. */

export class HeadingDial {
  private readonly input: HTMLInputElement;
  private readonly readout: HTMLElement;

  constructor(container: HTMLElement, onCommit: (deg: number) => void) {
    const label = document.createElement("label");
    label.className = "dial";
    label.append("heading ");

    this.input = document.createElement("input");
    this.input.type = "range";
    this.input.min = "0";
    this.input.max = "359";
    this.input.step = "1";
    this.input.value = "0";
    label.appendChild(this.input);

    this.readout = document.createElement("output");
    this.readout.textContent = "0°";
    label.appendChild(this.readout);
    container.appendChild(label);

    this.input.addEventListener("input", () => {
      this.readout.textContent = `${this.input.value}°`;
    });
    this.input.addEventListener("change", () => {
      onCommit(Number(this.input.value));
    });
  }

  /** Resync from state without firing the commit callback. */
  set value(deg: number) {
    this.input.value = String(Math.round(deg));
    this.readout.textContent = `${Math.round(deg)}°`;
  }
}
