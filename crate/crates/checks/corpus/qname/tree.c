int build_qname(char ncname[], char prefix[], char memory[], int len) {
    int lenn;
    int lenp;
    char ret[64];
    if (ncname == 0) {
        return 0;
    }
    if (prefix == 0) {
        return 0;
    }
    lenn = strlen(ncname);
    lenp = strlen(prefix);
    if (memory == 0 || len < lenn + lenp + 2) {
        ret = xmlMalloc(lenn + lenp + 2);
        if (ret == 0) {
            return 0;
        }
    } else {
        ret = memory;
    }
    memcpy(ret, prefix, lenp);
    ret[lenp] = 58;
    memcpy(ret + lenp + 1, ncname, lenn);
    ret[lenn + lenp + 1] = 0;
    return ret;
}

int split_qname(char name[], int len) {
    int i;
    i = 0;
    while (i < len) {
        if (name[i] == 58) {
            return i;
        }
        i = i + 1;
    }
    return 0 - 1;
}

int main(int fd) {
    char local[32];
    char prefix[64];
    char name[64];
    int n;
    n = read(fd, name, 64);
    read(fd, prefix, 64);
    build_qname(name, prefix, local, 32);
    split_qname(name, n);
    return 0;
}
