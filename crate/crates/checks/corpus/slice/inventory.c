int clamp(int v, int lo, int hi) {
    int r;
    r = v;
    if (r < lo) {
        r = lo;
    }
    if (r > hi) {
        r = hi;
    }
    return r;
}

int checksum(char data[], int len) {
    int sum;
    int i;
    int odd;
    int even;
    sum = 0;
    odd = 0;
    even = 0;
    i = 0;
    while (i < len) {
        sum = sum + data[i];
        if (i % 2 == 0) {
            even = even + data[i];
        } else {
            odd = odd + data[i];
        }
        i = i + 1;
    }
    sum = sum + odd * 3 + even;
    if (sum < 0) {
        sum = 0 - sum;
    }
    return sum % 256;
}

int parse_header(char hdr[], int len) {
    int version;
    int flags;
    int size;
    int valid;
    version = 0;
    flags = 0;
    size = 0;
    valid = 1;
    if (len < 4) {
        valid = 0;
    }
    if (valid == 1) {
        version = hdr[0];
        flags = hdr[1];
        size = hdr[2] * 256 + hdr[3];
    }
    if (version > 3) {
        valid = 0;
    }
    if (version == 0) {
        flags = 0;
    }
    if (size > 4096) {
        valid = 0;
    }
    if (flags % 2 == 1) {
        size = size + 4;
    }
    if (valid == 0) {
        return 0 - 1;
    }
    return size;
}

int scale_price(int price, int qty, int rate) {
    int base;
    int scaled;
    int bonus;
    int limit;
    base = price * qty;
    limit = 100000;
    bonus = 0;
    if (qty > 10) {
        bonus = qty / 10;
    }
    scaled = base * rate / 100;
    scaled = scaled - bonus;
    if (scaled > limit) {
        scaled = limit;
    }
    return scaled;
}

int apply_discount(int total, int code) {
    int discount;
    int floor;
    int result;
    discount = 0;
    floor = 10;
    if (code == 1) {
        discount = total / 10;
    }
    if (code == 2) {
        discount = total / 5;
    }
    if (code == 3) {
        discount = 25;
    }
    result = total - discount;
    if (result < floor) {
        result = floor;
    }
    return result;
}

int tax_for(int amount, int region) {
    int rate;
    int tax;
    int exempt;
    rate = 8;
    exempt = 0;
    if (region == 1) {
        rate = 5;
    }
    if (region == 2) {
        rate = 12;
    }
    if (region == 9) {
        exempt = 1;
    }
    if (region == 3) {
        rate = rate + 2;
    }
    if (amount < 0) {
        amount = 0;
    }
    tax = amount * rate / 100;
    if (exempt == 1) {
        tax = 0;
    }
    return tax;
}

int count_items(char list[], int n) {
    int count;
    int empty;
    int largest;
    int i;
    count = 0;
    empty = 0;
    largest = 0;
    i = 0;
    while (i < n) {
        if (list[i] > largest) {
            largest = list[i];
        }
        i = i + 1;
    }
    if (largest > 200) {
        log_warning(largest);
    }
    i = 0;
    while (i < n) {
        if (list[i] > 0) {
            count = count + 1;
        } else {
            empty = empty + 1;
        }
        i = i + 1;
    }
    if (empty > count) {
        log_warning(empty);
    }
    return count;
}

int validate_sku(int sku) {
    int prefix;
    int digits;
    int ok;
    prefix = sku / 10000;
    digits = sku % 10000;
    ok = 1;
    if (prefix < 1) {
        ok = 0;
    }
    if (prefix > 99) {
        ok = 0;
    }
    if (digits == 0) {
        ok = 0;
    }
    return ok;
}

int restock(int stock, int threshold, int batch) {
    int order;
    int rounds;
    int need;
    int safety;
    order = 0;
    rounds = 0;
    safety = threshold / 4;
    if (safety < 2) {
        safety = 2;
    }
    need = threshold + safety - stock;
    while (need > 0) {
        order = order + batch;
        need = need - batch;
        rounds = rounds + 1;
    }
    if (rounds > 5) {
        log_warning(rounds);
    }
    return order;
}

int ship_cost(int weight, int zone) {
    int cost;
    int per_kg;
    int surcharge;
    per_kg = 3;
    surcharge = 0;
    if (zone > 2) {
        per_kg = 5;
    }
    if (weight > 50) {
        surcharge = 20;
    }
    if (zone == 0) {
        per_kg = 1;
    }
    cost = weight * per_kg + surcharge;
    cost = clamp(cost, 5, 500);
    return cost;
}

int report(int total, int tax, int ship) {
    char line[80];
    int grand;
    int width;
    width = 40;
    grand = total + tax + ship;
    sprintf(line, "total", total);
    print_line(line, width);
    sprintf(line, "tax", tax);
    print_line(line, width);
    sprintf(line, "ship", ship);
    print_line(line, width);
    sprintf(line, "grand", grand);
    print_line(line, width);
    if (grand > 1000) {
        sprintf(line, "large order", grand);
        print_line(line, width);
    }
    return grand;
}

int main(int fd) {
    char hdr[8];
    char items[32];
    int size;
    int n;
    int price;
    int qty;
    int total;
    int tax;
    int ship;
    int sku;
    int stock;
    int order;
    int sum;
    int audit;
    int retries;
    audit = 0;
    retries = 3;
    while (retries > 0) {
        audit = audit + 1;
        retries = retries - 1;
    }
    read(fd, hdr, 8);
    size = parse_header(hdr, 8);
    n = read(fd, items, 32);
    qty = count_items(items, n);
    price = clamp(size, 1, 999);
    total = scale_price(price, qty, 110);
    total = apply_discount(total, 2);
    tax = tax_for(total, 1);
    ship = ship_cost(qty * 2, 3);
    sku = 120045;
    if (validate_sku(sku) == 0) {
        return 1;
    }
    stock = 4;
    order = restock(stock, 20, 6);
    sum = checksum(items, n);
    report(total, tax, ship);
    log_order(sku, order, sum);
    log_audit(audit);
    return 0;
}
